#pragma once

#include <span>
#include <vector>

#include "phif/common.hpp"
#include "phif/sparse.hpp"

namespace phif {

/// Live symmetric matrix during factorization. Both triangles are stored as
/// unordered rows. Removed DOFs have been decoupled to the identity; their rows
/// are dropped from storage and they read back as unit diagonal.
class ActiveMatrix {
 public:
  struct Entry {
    Index col;
    double value;
  };

  ActiveMatrix() = default;
  /// `alloc_order` (a permutation, optional) only decides the order rows are
  /// allocated in, for locality.
  explicit ActiveMatrix(const SymSparseMatrix& A, std::span<const Index> alloc_order = {});

  Index order() const { return static_cast<Index>(rows_.size()); }
  bool is_active(Index i) const { return active_[i] != 0; }
  std::vector<Index> active_dofs() const;
  std::span<const Entry> row(Index i) const { return rows_[i]; }

  /// Dense A(rows, cols); indices need not be sorted. Safe for concurrent
  /// readers.
  Matrix block(std::span<const Index> rows, std::span<const Index> cols) const;

  /// Sorted active columns coupled to any row of `group`, excluding the
  /// group itself.
  std::vector<Index> neighbors(std::span<const Index> group) const;

  /// A(rows, cols) += M, creating entries as needed. Only the given
  /// orientation is touched; callers keep symmetry.
  void add_block(std::span<const Index> rows, std::span<const Index> cols, const Matrix& M);
  /// A(rows, cols) = M, creating entries as needed.
  void assign_block(std::span<const Index> rows, std::span<const Index> cols, const Matrix& M);

  /// Decouples the DOFs: drops their rows and every entry in their columns.
  void remove(std::span<const Index> dofs);

  /// Dense matrix with identity on removed DOFs (small orders only).
  Matrix to_dense() const;
  std::size_t stored_entries() const;
  std::size_t active_count() const { return active_count_; }

 private:
  template <class Op>
  void merge_block(std::span<const Index> rows, std::span<const Index> cols, const Matrix& M, Op op);

  std::vector<std::vector<Entry>> rows_;
  std::vector<char> active_;
  std::size_t active_count_ = 0;
};

}  // namespace phif
