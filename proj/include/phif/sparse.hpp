#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "phif/common.hpp"

namespace phif {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Symmetric sparse matrix. Entries are given as a lower triangle; both
/// halves are kept in CSR form so that row access and matvecs need no
/// transposition.
class SymSparseMatrix {
 public:
  SymSparseMatrix() = default;

  /// Builds from lower-triangle triplets (row >= col). Duplicates are summed.
  static SymSparseMatrix from_lower(Index order, std::vector<Triplet> lower);
  static SymSparseMatrix identity(Index order);
  /// Lower triangle of a dense symmetric matrix; exact zeros are skipped.
  static SymSparseMatrix from_dense(const Matrix& dense);

  Index order() const { return order_; }
  std::size_t nonzeros() const { return cols_.size(); }

  std::span<const Index> row_cols(Index i) const {
    return {cols_.data() + row_ptr_[i], cols_.data() + row_ptr_[i + 1]};
  }
  std::span<const double> row_values(Index i) const {
    return {values_.data() + row_ptr_[i], values_.data() + row_ptr_[i + 1]};
  }
  double coeff(Index i, Index j) const;

  Vector multiply(const Vector& x, Exec exec = Exec::Serial) const;
  Matrix to_dense() const;
  std::vector<Triplet> lower_triplets() const;

  /// Coordinate listing, 1-based, lower triangle, matrix-market header.
  void write_matrix_market(std::ostream& out) const;

 private:
  Index order_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> cols_;
  std::vector<double> values_;
};

}  // namespace phif
