// Command-line driver: problem generation, factorization, solves and the
// benchmark/scaling harness.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "phif/bench.hpp"
#include "phif/diagnostics.hpp"
#include "phif/factorization.hpp"
#include "phif/grid.hpp"
#include "phif/krylov.hpp"
#include "phif/sparse.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitNotSpd = 2;
constexpr int kExitUsage = 64;

struct Args {
  int dim = 2;
  std::vector<int> n{64};
  int m = 8;
  std::vector<double> eps{1e-6};
  std::vector<std::string> methods{"phif"};
  std::uint64_t seed = 0;
  int seeds = 1;
  double contrast = 1e4;
  double smoothing_width = 4.0;
  double tol = 1e-12;
  int maxit = 500;
  std::string out;
  std::string in;
  std::string config;
  std::string dump_levels;
  bool large = false;
  bool estimate = false;
  bool parallel = false;
};

phif::CoefficientField make_field(const Args& a, const phif::GridSpec& spec) {
  phif::FieldOptions fo;
  fo.seed = a.seed;
  fo.contrast = a.contrast;
  fo.smoothing_width = a.smoothing_width;
  fo.exec = a.parallel ? phif::Exec::Parallel : phif::Exec::Serial;
  return phif::generate_field(spec, fo);
}

int cmd_gen(const Args& a) {
  const auto spec = phif::GridSpec::make(a.dim, a.n.front(), a.m);
  const auto field = make_field(a, spec);
  const phif::AssemblyOptions ao;
  const auto A = phif::assemble_operator(field, ao);
  const std::string base = a.out.empty() ? "problem" : a.out;
  {
    std::ofstream mtx(base + ".mtx");
    A.write_matrix_market(mtx);
  }
  {
    std::ofstream meta(base + ".json");
    meta << phif::field_metadata_json(field, ao) << '\n';
  }
  {
    std::ofstream f(base + ".field.txt");
    f.precision(17);
    for (double v : field.values) f << v << '\n';
  }
  std::cout << "wrote " << base << ".mtx, " << base << ".json, " << base << ".field.txt (N = " << A.order()
            << ", nnz = " << A.nonzeros() << ")\n";
  return kExitOk;
}

struct Problem {
  phif::GridSpec spec;
  phif::SymSparseMatrix A;
};

Problem make_problem(const Args& a) {
  auto spec = phif::GridSpec::make(a.dim, a.n.front(), a.m);
  auto A = phif::assemble_operator(make_field(a, spec));
  return {spec, std::move(A)};
}

phif::FactorOptions factor_options(const Args& a, const phif::GridSpec& spec) {
  phif::FactorOptions fo;
  fo.method = phif::parse_method(a.methods.front());
  fo.eps = a.eps.front();
  fo.exec = a.parallel ? phif::Exec::Parallel : phif::Exec::Serial;
  if (!a.dump_levels.empty()) {
    std::filesystem::create_directories(a.dump_levels);
    fo.level_observer = [dir = a.dump_levels, spec](const phif::LevelPartition& part) {
      std::ofstream csv(dir + "/level_" + std::to_string(part.level) + ".csv");
      phif::write_partition_csv(csv, spec, part);
    };
  }
  return fo;
}

void emit(const Args& a, const std::string& text) {
  if (a.out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream(a.out) << text << '\n';
  }
}

int cmd_factor(const Args& a) {
  const Problem p = make_problem(a);
  try {
    const auto F = phif::factorize(p.A, p.spec, factor_options(a, p.spec));
    auto j = nlohmann::json::parse(F.stats().to_json());
    j["status"] = "ok";
    j["N"] = p.A.order();
    emit(a, j.dump(2));
    return kExitOk;
  } catch (const phif::FactorizationNotSpd& e) {
    auto j = nlohmann::json::parse(e.partial.to_json());
    j["status"] = "not-spd";
    j["N"] = p.A.order();
    emit(a, j.dump(2));
    std::cerr << "factorization failed: " << e.what() << '\n';
    return kExitNotSpd;
  }
}

int cmd_solve(const Args& a) {
  const Problem p = make_problem(a);
  phif::Factorization F;
  try {
    F = phif::factorize(p.A, p.spec, factor_options(a, p.spec));
  } catch (const phif::FactorizationNotSpd& e) {
    std::cerr << "factorization failed: " << e.what() << '\n';
    std::cout << "status = not-spd\n";
    return kExitNotSpd;
  }
  std::mt19937_64 engine(a.seed ^ 0x9E3779B97F4A7C15ull);
  std::normal_distribution<double> normal;
  phif::Vector b(p.A.order());
  for (auto& v : b) v = normal(engine);

  phif::PcgOptions po;
  po.tol = a.tol;
  po.maxit = a.maxit;
  const auto res = phif::pcg(p.A, b, &F, po);
  std::cout << "N = " << p.A.order() << "\n|S_L| = " << F.stats().root_size << "\nt_factor_s = "
            << F.stats().t_total << "\nn_i = " << res.report.iterations
            << "\nrelative_residual = " << res.report.relative_residual
            << "\nstatus = " << (res.report.hit_maxit ? "maxit" : "ok") << '\n';
  if (a.estimate) {
    std::cout << "e_a = " << phif::estimate_apply_error(p.A, F).value << "\ne_s = "
              << phif::estimate_solve_error(p.A, F).value << '\n';
  }
  if (!a.out.empty()) {
    std::ofstream hist(a.out);
    phif::write_history_csv(hist, res.report);
  }
  return res.report.hit_maxit ? kExitFailure : kExitOk;
}

int cmd_bench(const Args& a) {
  phif::BenchConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw std::runtime_error("cannot open config " + a.config);
    cfg = phif::BenchConfig::from_json(nlohmann::json::parse(in));
  } else {
    cfg.dim = a.dim;
    cfg.sizes = a.n;
    cfg.m = a.m;
    cfg.eps = a.eps;
    for (const auto& mth : a.methods) cfg.methods.push_back(phif::parse_method(mth));
    cfg.seeds = a.seeds;
    cfg.seed_base = a.seed;
    cfg.contrast = a.contrast;
    cfg.smoothing_width = a.smoothing_width;
    cfg.tol = a.tol;
    cfg.maxit = a.maxit;
    cfg.large = a.large;
  }
  if (!a.out.empty()) cfg.csv_path = a.out;
  if (cfg.csv_path.empty()) cfg.csv_path = "bench.csv";
  cfg.validate();

  std::ofstream csv(cfg.csv_path);
  if (!csv) throw std::runtime_error("cannot write " + cfg.csv_path);
  std::ofstream(cfg.csv_path + ".meta.json") << cfg.to_json().dump(2) << '\n';
  std::cout << phif::kBenchCsvHeader << '\n';
  phif::run_benchmark(cfg, &csv, [](const phif::BenchRow& r) { std::cout << phif::to_csv_line(r) << std::endl; });
  return kExitOk;
}

int cmd_scaling(const Args& a) {
  if (a.in.empty()) throw std::runtime_error("scaling needs --in <bench.csv>");
  std::ifstream in(a.in);
  if (!in) throw std::runtime_error("cannot open " + a.in);
  auto rows = phif::read_bench_csv(in);
  if (a.eps.size() == 1) {
    std::erase_if(rows, [&](const phif::BenchRow& r) {
      return r.method != phif::Method::Exact && std::abs(r.eps - a.eps.front()) > 1e-3 * a.eps.front();
    });
  }
  const auto report = phif::emit_scaling(rows);
  const std::string base = a.out.empty() ? "scaling.csv" : a.out;
  {
    std::ofstream out(base);
    phif::write_scaling_csv(out, report);
  }
  {
    std::ofstream out(base + ".slopes.csv");
    phif::write_slopes_csv(out, report);
  }
  phif::write_scaling_csv(std::cout, report);
  phif::write_slopes_csv(std::cout, report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical interpolative factorization (HIF / PHIF) toolkit"};
  app.require_subcommand(1);
  Args a;
  bool eps_given = false;

  app.add_option("--dim", a.dim, "Spatial dimension")->check(CLI::IsMember({2, 3}));
  app.add_option("--n", a.n, "Grid size(s) per axis, n = 2^L m")->delimiter(',');
  app.add_option("--m", a.m, "Leaf cell size");
  app.add_option("--eps", a.eps, "ID relative tolerance(s)")->delimiter(',')->each([&](const std::string&) {
    eps_given = true;
  });
  app.add_option("--method", a.methods, "hif, phif or exact (comma list for bench)")
      ->delimiter(',')
      ->check(CLI::IsMember({"hif", "phif", "exact"}));
  app.add_option("--seed", a.seed, "Field seed (first seed for bench)");
  app.add_option("--seeds", a.seeds, "Number of seeds for statistical runs");
  app.add_option("--contrast", a.contrast, "Contrast ratio sigma");
  app.add_option("--smoothing-width", a.smoothing_width, "Gaussian standard deviation in units of h");
  app.add_option("--tol", a.tol, "PCG relative residual tolerance");
  app.add_option("--maxit", a.maxit, "PCG iteration cap");
  app.add_option("--out", a.out, "Output path");
  app.add_flag("--parallel", a.parallel, "Use the OpenMP kernels");

  auto* gen = app.add_subcommand("gen", "Write the field, the matrix and a JSON sidecar")->fallthrough();
  auto* factor = app.add_subcommand("factor", "Factorize and print statistics JSON")->fallthrough();
  factor->add_option("--dump-levels", a.dump_levels, "Directory for per-level DOF group CSVs");
  auto* solve = app.add_subcommand("solve", "Factorize and run preconditioned CG")->fallthrough();
  solve->add_flag("--estimate", a.estimate, "Also estimate e_a and e_s");
  auto* bench = app.add_subcommand("bench", "Run the benchmark protocol and write CSV rows")->fallthrough();
  bench->add_option("--config", a.config, "JSON benchmark configuration");
  bench->add_flag("--large", a.large, "Allow grid sizes beyond the desk-scale limits");
  auto* scaling = app.add_subcommand("scaling", "Fit log-log slopes to benchmark rows")->fallthrough();
  scaling->add_option("--in", a.in, "Benchmark CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }
  if (!eps_given && scaling->parsed()) a.eps.clear();

  try {
    if (gen->parsed()) return cmd_gen(a);
    if (factor->parsed()) return cmd_factor(a);
    if (solve->parsed()) return cmd_solve(a);
    if (bench->parsed()) return cmd_bench(a);
    if (scaling->parsed()) return cmd_scaling(a);
  } catch (const phif::NotSpdError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotSpd;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
