#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "phif/common.hpp"

namespace phif {

/// Uniform grid on the unit square/cube with n = 2^L * m intervals per side.
/// DOFs are the (n-1)^dim interior grid points, numbered with the first
/// coordinate fastest.
struct GridSpec {
  int dim = 2;
  int n = 0;
  int m = 0;
  int levels = 0;

  /// Validates n = 2^L * m with L >= 1, m >= 2. Throws ConfigError.
  static GridSpec make(int dim, int n, int m);

  double h() const { return 1.0 / n; }
  int side() const { return n - 1; }
  Index dof_count() const;

  /// Lattice coordinates (1..n-1 per axis) of a DOF.
  std::array<int, 3> coords(Index dof) const;
  Index dof_at(const std::array<int, 3>& c) const;
};

enum class FluxAverage { Arithmetic, Harmonic };

struct FieldOptions {
  std::uint64_t seed = 0;
  double contrast = 1e4;
  /// Gaussian standard deviation in units of h.
  double smoothing_width = 4.0;
  Exec exec = Exec::Serial;
};

struct CoefficientField {
  GridSpec spec;
  std::vector<double> values;
  std::uint64_t seed = 0;
  double contrast = 1.0;
  double smoothing_width = 4.0;

  static constexpr const char* generator = "mt19937_64";
};

/// Random field pipeline: uniform samples, Gaussian smoothing, median split.
CoefficientField generate_field(const GridSpec& spec, const FieldOptions& opts);

/// Constant field, mostly for tests.
CoefficientField constant_field(const GridSpec& spec, double value);

/// Separable Gaussian smoothing over the DOF lattice with reflective
/// boundaries, truncated at 4 standard deviations. Exposed for the
/// serial/parallel kernel comparison.
std::vector<double> gaussian_smooth(const GridSpec& spec, const std::vector<double>& samples,
                                    double stddev_points, Exec exec);

class SymSparseMatrix;

struct AssemblyOptions {
  double b = 0.0;
  FluxAverage flux = FluxAverage::Arithmetic;
};

/// Five/seven-point finite-difference operator of -div(a grad u) + b u,
/// homogeneous Dirichlet, scaled through by h^2.
SymSparseMatrix assemble_operator(const CoefficientField& field, const AssemblyOptions& opts = {});

struct ConditionEstimate {
  double kappa = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  bool converged = false;
};

/// lambda_max / lambda_min by power iteration on A and on A^{-1}. The inverse
/// is applied with a dense Cholesky for N <= 4096 and with CG otherwise.
ConditionEstimate estimate_operator_condition(const SymSparseMatrix& A, std::uint64_t seed = 1,
                                              double rel_tol = 1e-3, int maxit = 5000);

/// JSON sidecar describing a generated problem.
std::string field_metadata_json(const CoefficientField& field, const AssemblyOptions& opts);

}  // namespace phif
