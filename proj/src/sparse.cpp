#include "phif/sparse.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace phif {

SymSparseMatrix SymSparseMatrix::from_lower(Index order, std::vector<Triplet> lower) {
  std::vector<Triplet> full;
  full.reserve(2 * lower.size());
  for (const Triplet& t : lower) {
    if (t.row < 0 || t.col < 0 || t.row >= order || t.col >= order)
      throw ConfigError("triplet index out of range");
    if (t.col > t.row) throw ConfigError("expected lower-triangle triplets");
    full.push_back(t);
    if (t.row != t.col) full.push_back({t.col, t.row, t.value});
  }
  std::sort(full.begin(), full.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SymSparseMatrix A;
  A.order_ = order;
  A.row_ptr_.assign(order + 1, 0);
  for (std::size_t k = 0; k < full.size(); ++k) {
    if (!A.cols_.empty() && k > 0 && full[k].row == full[k - 1].row && full[k].col == full[k - 1].col) {
      A.values_.back() += full[k].value;
      continue;
    }
    A.cols_.push_back(full[k].col);
    A.values_.push_back(full[k].value);
    A.row_ptr_[full[k].row + 1]++;
  }
  for (Index i = 0; i < order; ++i) A.row_ptr_[i + 1] += A.row_ptr_[i];
  return A;
}

SymSparseMatrix SymSparseMatrix::identity(Index order) {
  std::vector<Triplet> t;
  t.reserve(order);
  for (Index i = 0; i < order; ++i) t.push_back({i, i, 1.0});
  return from_lower(order, std::move(t));
}

SymSparseMatrix SymSparseMatrix::from_dense(const Matrix& dense) {
  std::vector<Triplet> t;
  const Index n = static_cast<Index>(dense.rows());
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i)
      if (dense(i, j) != 0.0) t.push_back({i, j, dense(i, j)});
  return from_lower(n, std::move(t));
}

double SymSparseMatrix::coeff(Index i, Index j) const {
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return row_values(i)[it - cols.begin()];
}

Vector SymSparseMatrix::multiply(const Vector& x, Exec exec) const {
  Vector y(order_);
  auto row = [&](Index i) {
    double acc = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += values_[k] * x[cols_[k]];
    y[i] = acc;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < order_; ++i) row(i);
  } else {
    for (Index i = 0; i < order_; ++i) row(i);
  }
  return y;
}

Matrix SymSparseMatrix::to_dense() const {
  Matrix D = Matrix::Zero(order_, order_);
  for (Index i = 0; i < order_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) D(i, cols_[k]) = values_[k];
  return D;
}

std::vector<Triplet> SymSparseMatrix::lower_triplets() const {
  std::vector<Triplet> t;
  for (Index i = 0; i < order_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1] && cols_[k] <= i; ++k)
      t.push_back({i, cols_[k], values_[k]});
  return t;
}

void SymSparseMatrix::write_matrix_market(std::ostream& out) const {
  const auto t = lower_triplets();
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << order_ << ' ' << order_ << ' ' << t.size() << '\n';
  out << std::setprecision(17);
  for (const Triplet& e : t) out << e.row + 1 << ' ' << e.col + 1 << ' ' << e.value << '\n';
}

}  // namespace phif
