#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "phif/common.hpp"

namespace phif {

/// Cholesky breakdown: a pivot was not strictly positive.
class NotSpdError : public std::runtime_error {
 public:
  explicit NotSpdError(Index pivot)
      : std::runtime_error("matrix is not SPD (pivot " + std::to_string(pivot + 1) + ")"), pivot(pivot) {}
  NotSpdError(Index pivot, std::string where)
      : std::runtime_error("not SPD: " + where), pivot(pivot), where(std::move(where)) {}

  /// Zero-based pivot within the failing block.
  Index pivot;
  std::string where;
};

/// Dense lower-triangular Cholesky factor with a positive diagonal.
struct LowerTriangular {
  Matrix factor;

  Index order() const { return static_cast<Index>(factor.rows()); }
};

/// S = L L^T using the lower triangle of S. Any pivot that is not > 0
/// (including NaN) raises NotSpdError.
LowerTriangular cholesky(const Matrix& S);

enum class Side { Left, Right };
enum class Trans { No, Yes };

/// Left: op(L)^{-1} B. Right: B op(L)^{-1}. A zero diagonal raises NotSpdError.
Matrix tri_solve(const LowerTriangular& L, const Matrix& B, Side side = Side::Left, Trans trans = Trans::No);

/// Column interpolative decomposition M(:, redundant) ~= M(:, skeleton) * T.
/// Indices are column positions of M; skeletons are in pivot order.
struct IdResult {
  std::vector<Index> skeleton;
  std::vector<Index> redundant;
  Matrix T;  // |skeleton| x |redundant|
};

/// Column-pivoted Householder QR truncated once the largest remaining column
/// norm is <= eps * |R11|. Every discarded column then has residual norm at
/// most eps * |R11| <= eps * ||M||_F, so the Frobenius residual is bounded by
/// sqrt(|redundant|) * eps * ||M||_F. Ties between equal norms go to the
/// lowest original column.
IdResult interpolative_decomposition(const Matrix& M, double eps);

}  // namespace phif
