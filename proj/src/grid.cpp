#include "phif/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "phif/diagnostics.hpp"
#include "phif/krylov.hpp"
#include "phif/sparse.hpp"

namespace phif {

GridSpec GridSpec::make(int dim, int n, int m) {
  if (dim != 2 && dim != 3) throw ConfigError("grid dimension must be 2 or 3");
  if (m < 2) throw ConfigError("leaf size m must be at least 2");
  if (n <= m || n % m != 0) throw ConfigError("grid size n must be 2^L * m with L >= 1");
  int ratio = n / m;
  if ((ratio & (ratio - 1)) != 0) throw ConfigError("grid size n must be 2^L * m with L >= 1");
  int levels = 0;
  while ((1 << levels) < ratio) ++levels;
  return GridSpec{dim, n, m, levels};
}

Index GridSpec::dof_count() const {
  Index s = side();
  return dim == 2 ? s * s : s * s * s;
}

std::array<int, 3> GridSpec::coords(Index dof) const {
  const int s = side();
  std::array<int, 3> c{0, 0, 0};
  for (int d = 0; d < dim; ++d) {
    c[d] = static_cast<int>(dof % s) + 1;
    dof /= s;
  }
  return c;
}

Index GridSpec::dof_at(const std::array<int, 3>& c) const {
  const Index s = side();
  Index id = 0;
  for (int d = dim - 1; d >= 0; --d) id = id * s + (c[d] - 1);
  return id;
}

namespace {

// Symmetric reflection of an index into [0, len).
int reflect(int i, int len) {
  const int period = 2 * len;
  i %= period;
  if (i < 0) i += period;
  return i < len ? i : period - 1 - i;
}

std::vector<double> gaussian_kernel(double stddev) {
  const int radius = static_cast<int>(std::ceil(4.0 * stddev));
  std::vector<double> w(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    w[k + radius] = std::exp(-0.5 * (k * k) / (stddev * stddev));
    total += w[k + radius];
  }
  for (double& v : w) v /= total;
  return w;
}

// One pass of the separable filter along `axis`. Every output line is
// independent, which is what the OpenMP path splits on.
void smooth_axis(const GridSpec& spec, const std::vector<double>& in, std::vector<double>& out,
                 int axis, const std::vector<double>& w, Exec exec) {
  const int s = spec.side();
  const int radius = static_cast<int>(w.size() / 2);
  Index stride = 1;
  for (int d = 0; d < axis; ++d) stride *= s;
  const Index lines = spec.dof_count() / s;

  auto line = [&](Index l) {
    // l enumerates all index combinations except along `axis`
    const Index lo = l % stride;
    const Index hi = l / stride;
    const Index base = lo + hi * stride * s;
    for (int i = 0; i < s; ++i) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += w[k + radius] * in[base + static_cast<Index>(reflect(i + k, s)) * stride];
      out[base + static_cast<Index>(i) * stride] = acc;
    }
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (Index l = 0; l < lines; ++l) line(l);
  } else {
    for (Index l = 0; l < lines; ++l) line(l);
  }
}

}  // namespace

std::vector<double> gaussian_smooth(const GridSpec& spec, const std::vector<double>& samples,
                                    double stddev_points, Exec exec) {
  const auto w = gaussian_kernel(stddev_points);
  std::vector<double> a = samples;
  std::vector<double> b(samples.size());
  for (int axis = 0; axis < spec.dim; ++axis) {
    smooth_axis(spec, a, b, axis, w, exec);
    std::swap(a, b);
  }
  return a;
}

CoefficientField generate_field(const GridSpec& spec, const FieldOptions& opts) {
  if (!(opts.contrast >= 1.0)) throw ConfigError("contrast must be >= 1");
  if (!(opts.smoothing_width > 0.0)) throw ConfigError("smoothing width must be positive");
  // re-validate in case the caller filled GridSpec by hand
  const GridSpec checked = GridSpec::make(spec.dim, spec.n, spec.m);

  const Index N = checked.dof_count();
  std::mt19937_64 engine(opts.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> samples(N);
  for (double& v : samples) v = uniform(engine);

  std::vector<double> smooth = gaussian_smooth(checked, samples, opts.smoothing_width, opts.exec);

  std::vector<double> sorted = smooth;
  const std::size_t k = (static_cast<std::size_t>(N) + 1) / 2;  // lower median, 1-based rank k
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  const double median = sorted[k - 1];

  const double low = 1.0 / std::sqrt(opts.contrast);
  const double high = std::sqrt(opts.contrast);
  CoefficientField f{checked, {}, opts.seed, opts.contrast, opts.smoothing_width};
  f.values.resize(N);
  for (Index j = 0; j < N; ++j) f.values[j] = smooth[j] <= median ? low : high;
  return f;
}

CoefficientField constant_field(const GridSpec& spec, double value) {
  CoefficientField f{spec, std::vector<double>(spec.dof_count(), value), 0, 1.0, 4.0};
  return f;
}

SymSparseMatrix assemble_operator(const CoefficientField& field, const AssemblyOptions& opts) {
  if (opts.b < 0.0) throw ConfigError("reaction coefficient b must be non-negative");
  const GridSpec& spec = field.spec;
  const Index N = spec.dof_count();
  if (static_cast<Index>(field.values.size()) != N) throw ConfigError("field size does not match grid");
  const double h2 = spec.h() * spec.h();
  const int s = spec.side();

  auto face = [&](double a, double b) {
    return opts.flux == FluxAverage::Arithmetic ? 0.5 * (a + b) : 2.0 * a * b / (a + b);
  };

  std::vector<Triplet> lower;
  lower.reserve(static_cast<std::size_t>(N) * (spec.dim + 1));
  for (Index j = 0; j < N; ++j) {
    const auto c = spec.coords(j);
    const double aj = field.values[j];
    double diag = opts.b * h2;
    for (int d = 0; d < spec.dim; ++d) {
      for (int dir : {-1, 1}) {
        auto nb = c;
        nb[d] += dir;
        if (nb[d] < 1 || nb[d] > s) {
          // boundary point: the coefficient is extended from the interior node
          diag += aj;
          continue;
        }
        const Index k = spec.dof_at(nb);
        const double coef = face(aj, field.values[k]);
        diag += coef;
        if (k < j) lower.push_back({j, k, -coef});
      }
    }
    lower.push_back({j, j, diag});
  }
  return SymSparseMatrix::from_lower(N, std::move(lower));
}

ConditionEstimate estimate_operator_condition(const SymSparseMatrix& A, std::uint64_t seed,
                                              double rel_tol, int maxit) {
  const Index N = A.order();
  auto forward = [&](const Vector& x) { return A.multiply(x); };
  NormEstimate top = power_norm(forward, N, {rel_tol, maxit, seed});

  std::function<Vector(const Vector&)> inverse;
  Eigen::LLT<Matrix> llt;
  if (N <= 4096) {
    llt.compute(A.to_dense());
    if (llt.info() != Eigen::Success) throw ConsistencyError("operator is not SPD");
    inverse = [&](const Vector& x) -> Vector { return llt.solve(x); };
  } else {
    inverse = [&](const Vector& x) -> Vector {
      PcgOptions o;
      o.tol = 1e-12;
      o.maxit = 20 * N;
      return pcg(A, x, nullptr, o).x;
    };
  }
  NormEstimate bottom = power_norm(inverse, N, {rel_tol, maxit, seed + 1});

  ConditionEstimate est;
  est.lambda_max = top.value;
  est.lambda_min = 1.0 / bottom.value;
  est.kappa = top.value * bottom.value;
  est.converged = top.converged && bottom.converged;
  if (!est.converged) throw EstimatorError("condition estimate did not converge", est.kappa);
  return est;
}

std::string field_metadata_json(const CoefficientField& field, const AssemblyOptions& opts) {
  nlohmann::json j;
  j["dim"] = field.spec.dim;
  j["n"] = field.spec.n;
  j["m"] = field.spec.m;
  j["L"] = field.spec.levels;
  j["N"] = field.spec.dof_count();
  j["seed"] = field.seed;
  j["contrast"] = field.contrast;
  j["smoothing_width"] = field.smoothing_width;
  j["smoothing_kernel"] = "gaussian, stddev = smoothing_width*h, truncated at 4 stddev, reflective";
  j["median"] = "lower";
  j["generator"] = CoefficientField::generator;
  j["flux_average"] = opts.flux == FluxAverage::Arithmetic ? "arithmetic" : "harmonic";
  j["b"] = opts.b;
  j["scaling"] = "h^2";
  return j.dump(2);
}

}  // namespace phif
