#include "phif/active_matrix.hpp"

#include <algorithm>

namespace phif {

namespace {

// Column -> slot scatter map, all -1 between uses. One per thread so
// concurrent block() readers don't collide.
std::vector<Index>& scatter_map(Index order) {
  thread_local std::vector<Index> map;
  if (static_cast<Index>(map.size()) < order) map.assign(order, -1);
  return map;
}

struct Scatter {
  std::vector<Index>& map;
  std::span<const Index> cols;
  Scatter(Index order, std::span<const Index> c) : map(scatter_map(order)), cols(c) {
    for (std::size_t k = 0; k < cols.size(); ++k) map[cols[k]] = static_cast<Index>(k);
  }
  ~Scatter() {
    for (Index c : cols) map[c] = -1;
  }
};

}  // namespace

ActiveMatrix::ActiveMatrix(const SymSparseMatrix& A, std::span<const Index> alloc_order)
    : rows_(A.order()), active_(A.order(), 1), active_count_(A.order()) {
  auto fill = [&](Index i) {
    auto cols = A.row_cols(i);
    auto vals = A.row_values(i);
    rows_[i].reserve(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) rows_[i].push_back({cols[k], vals[k]});
  };
  if (alloc_order.empty()) {
    for (Index i = 0; i < A.order(); ++i) fill(i);
  } else {
    if (static_cast<Index>(alloc_order.size()) != A.order()) throw ConfigError("allocation order has the wrong size");
    for (Index i : alloc_order) fill(i);
  }
}

std::vector<Index> ActiveMatrix::active_dofs() const {
  std::vector<Index> out;
  out.reserve(active_count_);
  for (Index i = 0; i < order(); ++i)
    if (active_[i]) out.push_back(i);
  return out;
}

Matrix ActiveMatrix::block(std::span<const Index> rows, std::span<const Index> cols) const {
  Matrix M = Matrix::Zero(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  if (rows.empty() || cols.empty()) return M;
  const Scatter sc(order(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const Entry& e : rows_[rows[r]]) {
      const Index k = sc.map[e.col];
      if (k >= 0) M(static_cast<Index>(r), k) = e.value;
    }
  return M;
}

std::vector<Index> ActiveMatrix::neighbors(std::span<const Index> group) const {
  std::vector<Index>& mark = scatter_map(order());
  for (Index i : group) mark[i] = 0;
  std::vector<Index> out;
  for (Index i : group)
    for (const Entry& e : rows_[i])
      if (mark[e.col] < 0) {
        mark[e.col] = 0;
        out.push_back(e.col);
      }
  for (Index i : group) mark[i] = -1;
  for (Index c : out) mark[c] = -1;
  std::sort(out.begin(), out.end());
  return out;
}

template <class Op>
void ActiveMatrix::merge_block(std::span<const Index> rows, std::span<const Index> cols, const Matrix& M,
                               Op op) {
  if (rows.empty() || cols.empty()) return;
  const Scatter sc(order(), cols);
  std::vector<char> seen(cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& row = rows_[rows[r]];
    std::fill(seen.begin(), seen.end(), 0);
    for (Entry& e : row) {
      const Index k = sc.map[e.col];
      if (k < 0) continue;
      e.value = op(e.value, M(static_cast<Index>(r), k));
      seen[k] = 1;
    }
    row.reserve(row.size() + static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0)));
    for (std::size_t k = 0; k < cols.size(); ++k)
      if (!seen[k]) row.push_back({cols[k], op(0.0, M(static_cast<Index>(r), static_cast<Index>(k)))});
  }
}

void ActiveMatrix::add_block(std::span<const Index> rows, std::span<const Index> cols, const Matrix& M) {
  merge_block(rows, cols, M, [](double old, double upd) { return old + upd; });
}

void ActiveMatrix::assign_block(std::span<const Index> rows, std::span<const Index> cols, const Matrix& M) {
  merge_block(rows, cols, M, [](double, double upd) { return upd; });
}

void ActiveMatrix::remove(std::span<const Index> dofs) {
  std::vector<Index>& mark = scatter_map(order());
  std::vector<Index> touched;
  for (Index d : dofs) {
    if (!active_[d]) throw ConsistencyError("removing an inactive DOF");
    active_[d] = 0;
    --active_count_;
    for (const Entry& e : rows_[d])
      if (mark[e.col] < 0) {
        mark[e.col] = 0;
        touched.push_back(e.col);
      }
  }
  for (Index t : touched) {
    mark[t] = -1;
    if (!active_[t]) continue;
    auto& row = rows_[t];
    row.erase(std::remove_if(row.begin(), row.end(), [&](const Entry& e) { return !active_[e.col]; }),
              row.end());
  }
  for (Index d : dofs) {
    rows_[d].clear();
    rows_[d].shrink_to_fit();
  }
}

Matrix ActiveMatrix::to_dense() const {
  Matrix D = Matrix::Zero(order(), order());
  for (Index i = 0; i < order(); ++i) {
    if (!active_[i]) {
      D(i, i) = 1.0;
      continue;
    }
    for (const Entry& e : rows_[i]) D(i, e.col) = e.value;
  }
  return D;
}

std::size_t ActiveMatrix::stored_entries() const {
  std::size_t total = 0;
  for (const auto& r : rows_) total += r.size();
  return total;
}

}  // namespace phif
