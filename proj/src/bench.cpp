#include "phif/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "phif/diagnostics.hpp"
#include "phif/krylov.hpp"

namespace phif {

namespace {

constexpr std::uint64_t kRhsStream = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kEstimatorStream = 0xD1B54A32D192ED03ull;

template <class T>
std::string opt_str(const std::optional<T>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(6) << *v;
  return s.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view to_string(RowStatus s) {
  switch (s) {
    case RowStatus::Ok: return "ok";
    case RowStatus::NotSpd: return "not-spd";
    case RowStatus::MaxIt: return "maxit";
  }
  return "?";
}

void BenchConfig::validate() const {
  if (sizes.empty() || eps.empty() || methods.empty()) throw ConfigError("config needs sizes, eps and methods");
  if (seeds < 1) throw ConfigError("seeds must be >= 1");
  const int desk_limit = dim == 2 ? 512 : 64;
  for (int n : sizes) {
    GridSpec::make(dim, n, m);
    if (n > desk_limit && !large)
      throw ConfigError("n = " + std::to_string(n) + " is above desk scale; pass --large to allow it");
  }
  for (double e : eps)
    if (!(e > 0.0)) throw ConfigError("eps must be positive");
}

BenchConfig BenchConfig::from_json(const nlohmann::json& j) {
  BenchConfig c;
  c.dim = j.value("dim", c.dim);
  c.sizes = j.value("sizes", c.sizes);
  c.m = j.value("m", c.m);
  c.eps = j.value("eps", c.eps);
  for (const auto& name : j.value("methods", std::vector<std::string>{})) c.methods.push_back(parse_method(name));
  c.seeds = j.value("seeds", c.seeds);
  c.seed_base = j.value("seed_base", c.seed_base);
  c.contrast = j.value("contrast", c.contrast);
  c.smoothing_width = j.value("smoothing_width", c.smoothing_width);
  c.tol = j.value("tol", c.tol);
  c.maxit = j.value("maxit", c.maxit);
  c.estimator_tol = j.value("estimator_tol", c.estimator_tol);
  c.estimator_maxit = j.value("estimator_maxit", c.estimator_maxit);
  c.large = j.value("large", c.large);
  c.root_condition = j.value("root_condition", c.root_condition);
  c.csv_path = j.value("csv_path", c.csv_path);
  return c;
}

nlohmann::json BenchConfig::to_json() const {
  std::vector<std::string> names;
  for (Method mth : methods) names.emplace_back(to_string(mth));
  return {{"dim", dim},
          {"sizes", sizes},
          {"m", m},
          {"eps", eps},
          {"methods", names},
          {"seeds", seeds},
          {"seed_base", seed_base},
          {"contrast", contrast},
          {"smoothing_width", smoothing_width},
          {"tol", tol},
          {"maxit", maxit},
          {"estimator_tol", estimator_tol},
          {"estimator_maxit", estimator_maxit},
          {"large", large},
          {"root_condition", root_condition},
          {"csv_path", csv_path},
          {"generator", CoefficientField::generator}};
}

std::string to_csv_line(const BenchRow& r) {
  std::ostringstream s;
  s << to_string(r.method) << ',' << std::setprecision(6) << r.eps << ',' << r.dim << ',' << r.n << ',' << r.N
    << ',' << r.seed << ',' << opt_str(r.SL) << ',' << opt_str(r.e_a) << ',' << opt_str(r.e_s) << ','
    << opt_str(r.n_i) << ',' << r.t_factor_s << ',' << opt_str(r.t_apply_s) << ',' << opt_str(r.mem_bytes) << ','
    << to_string(r.status);
  return s.str();
}

BenchRow parse_csv_line(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  if (f.size() != 14) throw ConfigError("malformed benchmark CSV line: " + line);
  BenchRow r;
  r.method = parse_method(f[0]);
  r.eps = std::stod(f[1]);
  r.dim = std::stoi(f[2]);
  r.n = std::stoi(f[3]);
  r.N = std::stoi(f[4]);
  r.seed = std::stoull(f[5]);
  if (!f[6].empty()) r.SL = std::stoull(f[6]);
  if (!f[7].empty()) r.e_a = std::stod(f[7]);
  if (!f[8].empty()) r.e_s = std::stod(f[8]);
  if (!f[9].empty()) r.n_i = std::stoi(f[9]);
  r.t_factor_s = std::stod(f[10]);
  if (!f[11].empty()) r.t_apply_s = std::stod(f[11]);
  if (!f[12].empty()) r.mem_bytes = static_cast<std::size_t>(std::stod(f[12]));
  if (f[13] == "ok") r.status = RowStatus::Ok;
  else if (f[13] == "not-spd") r.status = RowStatus::NotSpd;
  else if (f[13] == "maxit") r.status = RowStatus::MaxIt;
  else throw ConfigError("unknown status '" + f[13] + "'");
  return r;
}

std::vector<BenchRow> read_bench_csv(std::istream& in) {
  std::vector<BenchRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      if (line != kBenchCsvHeader) throw ConfigError("unexpected benchmark CSV header");
      header = false;
      continue;
    }
    rows.push_back(parse_csv_line(line));
  }
  return rows;
}

BenchRow run_case(const BenchConfig& cfg, Method method, double eps, int n, std::uint64_t seed) {
  const GridSpec spec = GridSpec::make(cfg.dim, n, cfg.m);
  BenchRow row;
  row.method = method;
  row.eps = method == Method::Exact ? 0.0 : eps;
  row.dim = cfg.dim;
  row.n = n;
  row.N = spec.dof_count();
  row.seed = seed;

  FieldOptions fo;
  fo.seed = seed;
  fo.contrast = cfg.contrast;
  fo.smoothing_width = cfg.smoothing_width;
  const CoefficientField field = generate_field(spec, fo);
  const SymSparseMatrix A = assemble_operator(field);

  FactorOptions opts;
  opts.method = method;
  opts.eps = eps;
  const auto t0 = std::chrono::steady_clock::now();
  Factorization F;
  try {
    F = factorize(A, spec, opts);
  } catch (const FactorizationNotSpd&) {
    row.t_factor_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.status = RowStatus::NotSpd;
    return row;
  }
  row.t_factor_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  row.SL = F.stats().root_size;
  row.mem_bytes = F.memory_bytes();

  PowerOptions po{cfg.estimator_tol, cfg.estimator_maxit, seed ^ kEstimatorStream};
  row.e_a = estimate_apply_error(A, F, po).value;
  row.e_s = estimate_solve_error(A, F, po).value;

  std::mt19937_64 rhs_engine(seed ^ kRhsStream);
  std::normal_distribution<double> normal;
  Vector b(row.N);
  for (Index i = 0; i < row.N; ++i) b[i] = normal(rhs_engine);

  const auto ta = std::chrono::steady_clock::now();
  const Vector once = F.apply_inverse(b);
  row.t_apply_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - ta).count();
  (void)once;

  PcgOptions po_cg;
  po_cg.tol = cfg.tol;
  po_cg.maxit = cfg.maxit;
  try {
    const PcgResult res = pcg(A, b, &F, po_cg);
    row.n_i = res.report.iterations;
    if (res.report.hit_maxit) row.status = RowStatus::MaxIt;
  } catch (const NumericalBreakdown&) {
    row.status = RowStatus::MaxIt;
  }
  if (cfg.root_condition && F.stats().root_size <= 5000) row.root_condition = F.root_condition();
  return row;
}

std::vector<BenchRow> run_benchmark(const BenchConfig& cfg, std::ostream* csv,
                                    const std::function<void(const BenchRow&)>& on_row) {
  cfg.validate();
  std::vector<BenchRow> rows;
  if (csv) *csv << kBenchCsvHeader << '\n' << std::flush;
  for (Method method : cfg.methods)
    for (double eps : cfg.eps)
      for (int n : cfg.sizes)
        for (int k = 0; k < cfg.seeds; ++k) {
          BenchRow row = run_case(cfg, method, eps, n, cfg.seed_base + static_cast<std::uint64_t>(k));
          if (csv) *csv << to_csv_line(row) << '\n' << std::flush;
          if (on_row) on_row(row);
          rows.push_back(std::move(row));
        }
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ConfigError("slope needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw ConfigError("slope needs at least two distinct sizes");
  return sxy / sxx;
}

ScalingReport emit_scaling(const std::vector<BenchRow>& rows) {
  std::map<std::pair<Method, Index>, std::vector<const BenchRow*>> groups;
  std::vector<Index> sizes;
  int dim = 0;
  for (const BenchRow& r : rows) {
    if (r.status == RowStatus::NotSpd || !r.t_apply_s || !r.mem_bytes) continue;
    if (dim == 0) dim = r.dim;
    if (r.dim != dim) throw ConfigError("scaling rows mix dimensions");
    groups[{r.method, r.N}].push_back(&r);
    sizes.push_back(r.N);
  }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  if (sizes.size() < 2) throw ConfigError("scaling needs rows from at least two sizes");

  ScalingReport rep;
  for (const auto& [key, list] : groups) {
    std::vector<double> tf, ta, mem;
    for (const BenchRow* r : list) {
      tf.push_back(r->t_factor_s);
      ta.push_back(*r->t_apply_s);
      mem.push_back(static_cast<double>(*r->mem_bytes));
    }
    rep.lines.push_back({key.second, key.first, median(tf), median(ta), median(mem)});
  }

  const std::vector<double> time_ref = dim == 3 ? std::vector<double>{1.0, 1.5} : std::vector<double>{1.0};
  const std::vector<double> mem_ref = dim == 3 ? std::vector<double>{1.0, 4.0 / 3.0} : std::vector<double>{1.0};
  for (Method method : {Method::HIF, Method::PHIF, Method::Exact}) {
    std::vector<double> N, tf, ta, mem;
    for (const auto& l : rep.lines)
      if (l.method == method) {
        N.push_back(l.N);
        tf.push_back(l.factor_time);
        ta.push_back(l.apply_time);
        mem.push_back(l.memory);
      }
    if (N.size() < 2) continue;
    rep.slopes.push_back({method, "factor_time", loglog_slope(N, tf), time_ref});
    rep.slopes.push_back({method, "apply_time", loglog_slope(N, ta), time_ref});
    rep.slopes.push_back({method, "memory", loglog_slope(N, mem), mem_ref});
  }
  return rep;
}

void write_scaling_csv(std::ostream& out, const ScalingReport& report) {
  out << "N,method,factor_time,apply_time,memory\n" << std::setprecision(8);
  for (const auto& l : report.lines)
    out << l.N << ',' << to_string(l.method) << ',' << l.factor_time << ',' << l.apply_time << ',' << l.memory
        << '\n';
}

void write_slopes_csv(std::ostream& out, const ScalingReport& report) {
  out << "method,quantity,slope,reference_slopes\n" << std::setprecision(6);
  for (const auto& s : report.slopes) {
    out << to_string(s.method) << ',' << s.quantity << ',' << s.slope << ',';
    for (std::size_t k = 0; k < s.reference.size(); ++k) out << (k ? ";" : "") << s.reference[k];
    out << '\n';
  }
}

}  // namespace phif
