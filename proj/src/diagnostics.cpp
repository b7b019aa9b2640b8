#include "phif/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "phif/dense.hpp"
#include "phif/factorization.hpp"
#include "phif/sparse.hpp"

namespace phif {

NormEstimate power_norm(const LinearOperator& op, Index dim, const PowerOptions& opts) {
  NormEstimate est;
  if (dim == 0) {
    est.converged = true;
    return est;
  }
  std::mt19937_64 engine(opts.seed);
  std::normal_distribution<double> normal;
  Vector x(dim);
  for (Index i = 0; i < dim; ++i) x[i] = normal(engine);
  x.normalize();

  // op^2 rather than op so that +-lambda pairs settle too;
  // op(op(x_prev)) = |y_prev| y comes for free.
  double previous = -1.0;
  Vector x_prev;
  for (int k = 1; k <= opts.maxit; ++k) {
    const Vector y = op(x);
    const double value = y.norm();
    if (!std::isfinite(value)) throw EstimatorError("power iteration produced a non-finite value", est.value);
    est.value = value;
    est.iterations = k;
    if (value == 0.0) {
      est.converged = true;
      est.achieved_tol = 0.0;
      return est;
    }
    const double eig_residual = (y - x.dot(y) * x).norm() / value;
    if (eig_residual <= 64 * std::numeric_limits<double>::epsilon()) {
      est.converged = true;
      est.achieved_tol = 0.0;
      return est;
    }
    if (previous > 0) {
      const Vector w = previous * y;
      const double sq_residual = (w - x_prev.dot(w) * x_prev).norm() / w.norm();
      const double change = std::abs(value - previous) / value;
      est.achieved_tol = std::max(change, sq_residual);
      if (est.achieved_tol <= opts.rel_tol) {
        est.converged = true;
        return est;
      }
    } else {
      est.achieved_tol = INFINITY;
    }
    previous = value;
    x_prev = x;
    x = y / value;
  }
  return est;
}

NormEstimate power_norm_general(const LinearOperator& op, const LinearOperator& op_t, Index dim,
                                const PowerOptions& opts) {
  auto gram = [&](const Vector& x) { return op_t(op(x)); };
  NormEstimate est = power_norm(gram, dim, opts);
  est.value = std::sqrt(est.value);
  return est;
}

NormEstimate estimate_apply_error(const SymSparseMatrix& A, const Factorization& F, const PowerOptions& opts) {
  auto diff = [&](const Vector& x) -> Vector { return A.multiply(x) - F.apply(x); };
  auto fwd = [&](const Vector& x) -> Vector { return A.multiply(x); };
  NormEstimate num = power_norm(diff, A.order(), opts);
  PowerOptions o2 = opts;
  o2.seed = opts.seed + 1;
  NormEstimate den = power_norm(fwd, A.order(), o2);
  NormEstimate out = num;
  out.value = den.value > 0 ? num.value / den.value : 0.0;
  out.converged = num.converged && den.converged;
  out.iterations = num.iterations + den.iterations;
  out.achieved_tol = std::max(num.achieved_tol, den.achieved_tol);
  return out;
}

NormEstimate estimate_solve_error(const SymSparseMatrix& A, const Factorization& F, const PowerOptions& opts) {
  auto op = [&](const Vector& x) -> Vector { return x - F.apply_ginv(A.multiply(F.apply_ginv_t(x))); };
  return power_norm(op, A.order(), opts);
}

NormEstimate estimate_inverse_residual(const SymSparseMatrix& A, const Factorization& F, const PowerOptions& opts) {
  auto op = [&](const Vector& x) -> Vector { return x - A.multiply(F.apply_inverse(x)); };
  auto op_t = [&](const Vector& x) -> Vector { return x - F.apply_inverse(A.multiply(x)); };
  return power_norm_general(op, op_t, A.order(), opts);
}

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()[0];
}

DenseOracle::DenseOracle(const SymSparseMatrix& A) : DenseOracle([&] {
  if (A.order() > kMaxOrder) throw ConfigError("dense oracle limited to N <= 4096");
  return A.to_dense();
}()) {}

DenseOracle::DenseOracle(Matrix A) : A_(std::move(A)) {
  if (A_.rows() > kMaxOrder) throw ConfigError("dense oracle limited to N <= 4096");
  cholesky(A_);  // throws NotSpdError with the failing pivot
  llt_.compute(A_);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A_, Eigen::EigenvaluesOnly);
  eigenvalues_ = eig.eigenvalues();
}

Vector DenseOracle::solve(const Vector& b) const { return llt_.solve(b); }

double DenseOracle::norm() const { return eigenvalues_.size() ? eigenvalues_.maxCoeff() : 0.0; }

double DenseOracle::condition() const {
  if (eigenvalues_.size() == 0) return 1.0;
  return eigenvalues_.maxCoeff() / eigenvalues_.minCoeff();
}

Matrix DenseOracle::materialize(const Factorization& F, Vector (Factorization::*op)(const Vector&) const) {
  const Index n = F.order();
  Matrix out(n, n);
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    out.col(j) = (F.*op)(e);
    e[j] = 0.0;
  }
  return out;
}

double DenseOracle::apply_error(const Factorization& F) const {
  const Matrix Fd = materialize(F, &Factorization::apply);
  return spectral_norm(A_ - Fd) / norm();
}

double DenseOracle::solve_error(const Factorization& F) const {
  const Matrix Ginv = materialize(F, &Factorization::apply_ginv);
  const Matrix C = Ginv * A_ * Ginv.transpose();
  return spectral_norm(Matrix::Identity(A_.rows(), A_.cols()) - C);
}

double DenseOracle::inverse_residual(const Factorization& F) const {
  const Matrix Finv = materialize(F, &Factorization::apply_inverse);
  return spectral_norm(Matrix::Identity(A_.rows(), A_.cols()) - A_ * Finv);
}

}  // namespace phif
