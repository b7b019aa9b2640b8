#include "phif/dense.hpp"

#include <cmath>
#include <numeric>

namespace phif {

namespace {

constexpr Index kCholeskyBlock = 96;

void cholesky_unblocked(Eigen::Ref<Matrix> A, Index offset) {
  const Index n = static_cast<Index>(A.rows());
  for (Index j = 0; j < n; ++j) {
    const double d = A(j, j) - A.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) throw NotSpdError(offset + j);
    const double ljj = std::sqrt(d);
    A(j, j) = ljj;
    const Index rest = n - j - 1;
    if (rest > 0) {
      A.col(j).tail(rest).noalias() -= A.block(j + 1, 0, rest, j) * A.row(j).head(j).transpose();
      A.col(j).tail(rest) /= ljj;
    }
  }
}

// In-place lower Cholesky; the strict upper triangle is left untouched.
void cholesky_blocked(Eigen::Ref<Matrix> A, Index offset) {
  const Index n = static_cast<Index>(A.rows());
  if (n <= kCholeskyBlock) {
    cholesky_unblocked(A, offset);
    return;
  }
  const Index k = n / 2;
  cholesky_blocked(A.topLeftCorner(k, k), offset);
  auto L11 = A.topLeftCorner(k, k).triangularView<Eigen::Lower>();
  L11.transpose().solveInPlace<Eigen::OnTheRight>(A.bottomLeftCorner(n - k, k));
  A.bottomRightCorner(n - k, n - k).selfadjointView<Eigen::Lower>().rankUpdate(A.bottomLeftCorner(n - k, k), -1.0);
  cholesky_blocked(A.bottomRightCorner(n - k, n - k), offset + k);
}

}  // namespace

LowerTriangular cholesky(const Matrix& S) {
  if (S.rows() != S.cols()) throw ConfigError("cholesky needs a square matrix");
  Matrix A = S;
  cholesky_blocked(A, 0);
  A.triangularView<Eigen::StrictlyUpper>().setZero();
  return LowerTriangular{std::move(A)};
}

Matrix tri_solve(const LowerTriangular& L, const Matrix& B, Side side, Trans trans) {
  const Index k = L.order();
  for (Index i = 0; i < k; ++i)
    if (L.factor(i, i) == 0.0) throw NotSpdError(i);
  const bool conform = side == Side::Left ? B.rows() == k : B.cols() == k;
  if (!conform) throw ConfigError("tri_solve: shape mismatch");

  Matrix X = B;
  const auto tri = L.factor.triangularView<Eigen::Lower>();
  if (side == Side::Left) {
    if (trans == Trans::No) tri.solveInPlace(X);
    else tri.transpose().solveInPlace(X);
  } else {
    if (trans == Trans::No) tri.solveInPlace<Eigen::OnTheRight>(X);
    else tri.transpose().solveInPlace<Eigen::OnTheRight>(X);
  }
  return X;
}

IdResult interpolative_decomposition(const Matrix& M, double eps) {
  if (eps < 0.0) throw ConfigError("ID tolerance must be non-negative");
  const Index cols = static_cast<Index>(M.cols());
  IdResult id;
  if (cols == 0) return id;

  // Column pivoting only sees column norms and inner products, so a tall
  // block can be replaced by the R factor of its unpivoted QR.
  Matrix A;
  if (M.rows() > 2 * M.cols()) {
    Eigen::HouseholderQR<Matrix> qr(M);
    A = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  } else {
    A = M;
  }
  const Index rows = static_cast<Index>(A.rows());

  std::vector<Index> perm(cols);
  std::iota(perm.begin(), perm.end(), 0);
  Vector norms = A.colwise().norm().transpose();

  Index rank = 0;
  double reference = 0.0;
  const Index steps = std::min(rows, cols);
  for (Index k = 0; k < steps; ++k) {
    Index p = k;
    for (Index j = k + 1; j < cols; ++j)
      if (norms[j] > norms[p] || (norms[j] == norms[p] && perm[j] < perm[p])) p = j;
    if (k == 0) reference = norms[p];
    if (!(norms[p] > eps * reference) || norms[p] == 0.0) break;

    if (p != k) {
      A.col(k).swap(A.col(p));
      std::swap(perm[k], perm[p]);
      std::swap(norms[k], norms[p]);
    }

    // Householder reflector for A(k:, k)
    const Index len = rows - k;
    Vector v = A.col(k).tail(len);
    const double alpha = v.norm();
    const double beta = v[0] > 0 ? -alpha : alpha;
    v[0] -= beta;
    const double vnorm2 = v.squaredNorm();
    if (vnorm2 > 0.0 && k + 1 < cols) {
      auto trailing = A.block(k, k + 1, len, cols - k - 1);
      Eigen::RowVectorXd w = (v.transpose() * trailing) * (2.0 / vnorm2);
      trailing.noalias() -= v * w;
    }
    A(k, k) = beta;
    A.col(k).tail(len - 1).setZero();
    for (Index j = k + 1; j < cols; ++j) norms[j] = A.col(j).tail(len - 1).norm();
    rank = k + 1;
  }

  id.skeleton.assign(perm.begin(), perm.begin() + rank);
  id.redundant.assign(perm.begin() + rank, perm.end());
  id.T = A.block(0, rank, rank, cols - rank);
  if (rank > 0) A.topLeftCorner(rank, rank).triangularView<Eigen::Upper>().solveInPlace(id.T);
  return id;
}

}  // namespace phif
