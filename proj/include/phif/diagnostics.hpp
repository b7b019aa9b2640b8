#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>

#include "phif/common.hpp"
#include "phif/krylov.hpp"

namespace phif {

class SymSparseMatrix;
class Factorization;

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Relative change between the last two estimates.
  double achieved_tol = 0.0;
};

struct PowerOptions {
  double rel_tol = 1e-2;
  int maxit = 200;
  std::uint64_t seed = 0;
};

class EstimatorError : public std::runtime_error {
 public:
  EstimatorError(const std::string& what, double partial) : std::runtime_error(what), partial(partial) {}
  double partial;
};

/// Spectral norm of a symmetric operator by power iteration from a random
/// unit vector. Stops once two successive estimates agree to rel_tol and the
/// iterate is an eigenvector of op^2 to that tolerance.
NormEstimate power_norm(const LinearOperator& op, Index dim, const PowerOptions& opts = {});

/// ||B|| for a general operator via power iteration on B^T B.
NormEstimate power_norm_general(const LinearOperator& op, const LinearOperator& op_t, Index dim,
                                const PowerOptions& opts = {});

/// e_a = ||A - F|| / ||A||
NormEstimate estimate_apply_error(const SymSparseMatrix& A, const Factorization& F, const PowerOptions& opts = {});

/// e_s = ||I - G^{-1} A G^{-T}||
NormEstimate estimate_solve_error(const SymSparseMatrix& A, const Factorization& F, const PowerOptions& opts = {});

/// ||I - A F^{-1}|| via power iteration on the non-symmetric residual operator.
NormEstimate estimate_inverse_residual(const SymSparseMatrix& A, const Factorization& F,
                                       const PowerOptions& opts = {});

/// Dense reference quantities for small problems.
class DenseOracle {
 public:
  static constexpr Index kMaxOrder = 4096;

  explicit DenseOracle(const SymSparseMatrix& A);
  explicit DenseOracle(Matrix A);

  const Matrix& matrix() const { return A_; }
  Vector solve(const Vector& b) const;
  const Vector& eigenvalues() const { return eigenvalues_; }
  double norm() const;
  double condition() const;

  /// Dense images of the factorization's operators, column by column.
  static Matrix materialize(const Factorization& F, Vector (Factorization::*op)(const Vector&) const);

  double apply_error(const Factorization& F) const;
  double solve_error(const Factorization& F) const;
  double inverse_residual(const Factorization& F) const;

 private:
  Matrix A_;
  Eigen::LLT<Matrix> llt_;
  Vector eigenvalues_;
};

/// Largest singular value of a dense matrix.
double spectral_norm(const Matrix& M);

}  // namespace phif
