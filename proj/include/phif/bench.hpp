#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phif/factorization.hpp"

namespace phif {

enum class RowStatus { Ok, NotSpd, MaxIt };

std::string_view to_string(RowStatus s);

/// One (method, eps, n, seed) experiment.
struct BenchRow {
  Method method = Method::PHIF;
  double eps = 0.0;
  int dim = 2;
  int n = 0;
  Index N = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> SL;
  std::optional<double> e_a;
  std::optional<double> e_s;
  std::optional<int> n_i;
  double t_factor_s = 0.0;
  std::optional<double> t_apply_s;
  std::optional<std::size_t> mem_bytes;
  RowStatus status = RowStatus::Ok;
  /// Not part of the CSV; kept for callers that want it.
  std::optional<double> root_condition;
};

struct BenchConfig {
  int dim = 2;
  std::vector<int> sizes;
  int m = 8;
  std::vector<double> eps;
  std::vector<Method> methods;
  int seeds = 1;
  std::uint64_t seed_base = 0;
  double contrast = 1e4;
  double smoothing_width = 4.0;
  double tol = 1e-12;
  int maxit = 500;
  double estimator_tol = 1e-2;
  int estimator_maxit = 200;
  bool large = false;
  bool root_condition = false;
  std::string csv_path;

  /// Throws ConfigError: grid sizes not 2^L m, or above desk scale without `large`.
  void validate() const;
  static BenchConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Exact CSV header of the benchmark table.
inline constexpr const char* kBenchCsvHeader =
    "method,eps,dim,n,N,seed,SL,e_a,e_s,n_i,t_factor_s,t_apply_s,mem_bytes,status";

std::string to_csv_line(const BenchRow& row);
BenchRow parse_csv_line(const std::string& line);
std::vector<BenchRow> read_bench_csv(std::istream& in);

/// Runs one configuration: field, assembly, factorization, error estimates
/// and a PCG solve of a Gaussian right-hand side.
BenchRow run_case(const BenchConfig& cfg, Method method, double eps, int n, std::uint64_t seed);

/// Every (method, eps, n, seed) of the config. Rows are written to `csv`
/// (if given) as soon as they finish.
std::vector<BenchRow> run_benchmark(const BenchConfig& cfg, std::ostream* csv = nullptr,
                                    const std::function<void(const BenchRow&)>& on_row = {});

struct ScalingLine {
  Index N = 0;
  Method method = Method::PHIF;
  double factor_time = 0.0;
  double apply_time = 0.0;
  double memory = 0.0;
};

struct ScalingSlope {
  Method method = Method::PHIF;
  std::string quantity;  // factor_time, apply_time, memory
  double slope = 0.0;
  std::vector<double> reference;  // reference exponents in N
};

struct ScalingReport {
  std::vector<ScalingLine> lines;
  std::vector<ScalingSlope> slopes;
};

/// Medians of ok rows per (method, N) and least-squares log-log slopes per
/// method. Refuses fewer than two distinct sizes.
ScalingReport emit_scaling(const std::vector<BenchRow>& rows);

/// Slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_scaling_csv(std::ostream& out, const ScalingReport& report);
void write_slopes_csv(std::ostream& out, const ScalingReport& report);

}  // namespace phif
