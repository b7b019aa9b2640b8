#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "phif/common.hpp"

namespace phif {

class SymSparseMatrix;
class Factorization;

using LinearOperator = std::function<Vector(const Vector&)>;

struct PcgOptions {
  double tol = 1e-12;
  int maxit = 500;
  /// Recompute b - A x from scratch this often.
  int refresh_every = 50;
  /// Called after every iteration with the current iterate.
  std::function<void(int, const Vector&)> on_iterate;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> history;  // history[k] = residual after k iterations
  double seconds = 0.0;
  bool hit_maxit = false;
};

struct PcgResult {
  Vector x;
  SolveReport report;
};

class NumericalBreakdown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Preconditioned CG from x0 = 0; stops on ||b - A x|| / ||b|| <= tol.
/// An empty preconditioner means plain CG.
PcgResult pcg(const LinearOperator& A, const Vector& b, const LinearOperator& precond, const PcgOptions& opts = {});

/// Same, preconditioned with F^{-1} when `F` is not null.
PcgResult pcg(const SymSparseMatrix& A, const Vector& b, const Factorization* F, const PcgOptions& opts = {});

/// iteration,relative_residual
void write_history_csv(std::ostream& out, const SolveReport& report);

}  // namespace phif
