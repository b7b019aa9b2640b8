#include <doctest.h>

#include <sstream>

#include "phif/bench.hpp"

using namespace phif;

namespace {

BenchRow synthetic(Method m, Index N, double t, double mem) {
  BenchRow r;
  r.method = m;
  r.eps = 1e-6;
  r.N = N;
  r.n = 0;
  r.SL = 10;
  r.e_a = 1e-7;
  r.e_s = 1e-3;
  r.n_i = 4;
  r.t_factor_s = t;
  r.t_apply_s = t / 10;
  r.mem_bytes = static_cast<std::size_t>(mem);
  return r;
}

}  // namespace

TEST_CASE("csv header is exact") {
  CHECK(std::string(kBenchCsvHeader) ==
        "method,eps,dim,n,N,seed,SL,e_a,e_s,n_i,t_factor_s,t_apply_s,mem_bytes,status");
}

TEST_CASE("csv rows round-trip") {
  BenchRow r = synthetic(Method::HIF, 65025, 1.5, 123456789);
  r.dim = 2;
  r.n = 256;
  r.seed = 3;
  const BenchRow back = parse_csv_line(to_csv_line(r));
  CHECK(back.method == Method::HIF);
  CHECK(back.n == 256);
  CHECK(back.N == 65025);
  CHECK(back.seed == 3);
  CHECK(*back.SL == 10);
  CHECK(*back.e_a == doctest::Approx(1e-7));
  CHECK(*back.n_i == 4);
  CHECK(*back.mem_bytes == 123456789u);
  CHECK(back.status == RowStatus::Ok);

  BenchRow bad;
  bad.method = Method::HIF;
  bad.status = RowStatus::NotSpd;
  const std::string line = to_csv_line(bad);
  CHECK(line.find(",,,,") != std::string::npos);
  const BenchRow nb = parse_csv_line(line);
  CHECK(nb.status == RowStatus::NotSpd);
  CHECK(!nb.SL);
  CHECK(!nb.e_a);
  CHECK(!nb.e_s);
  CHECK(!nb.n_i);
  CHECK(!nb.mem_bytes);
  CHECK_THROWS_AS(parse_csv_line("phif,1"), ConfigError);

  std::istringstream in(std::string(kBenchCsvHeader) + "\n" + to_csv_line(r) + "\n" + line + "\n");
  CHECK(read_bench_csv(in).size() == 2);
  std::istringstream wrong("method,eps\n");
  CHECK_THROWS_AS(read_bench_csv(wrong), ConfigError);
}

TEST_CASE("config validation and json") {
  BenchConfig c;
  c.sizes = {256, 512};
  c.eps = {1e-6};
  c.methods = {Method::PHIF};
  CHECK_NOTHROW(c.validate());
  c.sizes = {1024};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.large = true;
  CHECK_NOTHROW(c.validate());
  c.sizes = {100};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.sizes = {64};
  c.dim = 3;
  c.large = false;
  CHECK_NOTHROW(c.validate());
  c.sizes = {128};
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c.sizes = {32};
  c.seeds = 4;
  c.methods = {Method::HIF, Method::Exact};
  const BenchConfig back = BenchConfig::from_json(c.to_json());
  CHECK(back.dim == 3);
  CHECK(back.sizes == c.sizes);
  CHECK(back.seeds == 4);
  CHECK(back.methods == c.methods);
  CHECK(c.to_json()["generator"] == "mt19937_64");
}

TEST_CASE("exact rows report round-off errors and immediate convergence") {
  BenchConfig c;
  c.dim = 2;
  c.sizes = {32};
  c.eps = {1e-6};
  c.methods = {Method::Exact};
  std::ostringstream csv;
  const auto rows = run_benchmark(c, &csv);
  REQUIRE(rows.size() == 1);
  const BenchRow& r = rows[0];
  CHECK(r.status == RowStatus::Ok);
  CHECK(*r.e_a <= 1e-9);
  CHECK(*r.e_s <= 1e-9);
  CHECK(*r.n_i <= 2);
  CHECK(r.eps == 0.0);
  CHECK(r.N == 31 * 31);
  CHECK(csv.str().rfind(std::string(kBenchCsvHeader) + "\n", 0) == 0);
}

TEST_CASE("reruns give identical rows apart from timings") {
  BenchConfig c;
  c.dim = 2;
  c.sizes = {32, 64};
  c.eps = {1e-4};
  c.methods = {Method::HIF, Method::PHIF};
  c.seeds = 2;
  const auto a = run_benchmark(c), b = run_benchmark(c);
  REQUIRE(a.size() == 8);
  for (std::size_t k = 0; k < a.size(); ++k) {
    BenchRow x = a[k], y = b[k];
    x.t_factor_s = y.t_factor_s = 0;
    x.t_apply_s = y.t_apply_s = 0;
    CHECK(to_csv_line(x) == to_csv_line(y));
  }
}

TEST_CASE("scaling slopes") {
  SUBCASE("perfectly linear synthetic input") {
    const std::vector<BenchRow> rows{synthetic(Method::PHIF, 1000, 1.0, 1e6), synthetic(Method::PHIF, 4000, 4.0, 4e6)};
    const auto rep = emit_scaling(rows);
    REQUIRE(rep.slopes.size() == 3);
    for (const auto& s : rep.slopes) {
      CHECK(std::abs(s.slope - 1.0) <= 0.05);
      CHECK(s.reference == std::vector<double>{1.0});
    }
  }
  SUBCASE("one line per method and size, medians over seeds") {
    std::vector<BenchRow> rows;
    for (Method m : {Method::HIF, Method::PHIF})
      for (Index N : {100, 400})
        for (double t : {1.0, 2.0, 9.0}) rows.push_back(synthetic(m, N, t * N, 8.0 * N));
    const auto rep = emit_scaling(rows);
    CHECK(rep.lines.size() == 4);
    for (const auto& l : rep.lines) CHECK(l.factor_time == doctest::Approx(2.0 * l.N));
    std::ostringstream os, ss;
    write_scaling_csv(os, rep);
    write_slopes_csv(ss, rep);
    CHECK(os.str().rfind("N,method,factor_time,apply_time,memory\n", 0) == 0);
    CHECK(ss.str().rfind("method,quantity,slope,reference_slopes\n", 0) == 0);
  }
  SUBCASE("3D references") {
    std::vector<BenchRow> rows{synthetic(Method::HIF, 3375, 1, 1), synthetic(Method::HIF, 29791, 9, 9)};
    for (auto& r : rows) r.dim = 3;
    const auto rep = emit_scaling(rows);
    for (const auto& s : rep.slopes) {
      if (s.quantity == "memory") CHECK(s.reference == std::vector<double>{1.0, 4.0 / 3.0});
      else CHECK(s.reference == std::vector<double>{1.0, 1.5});
    }
  }
  SUBCASE("refusals") {
    CHECK_THROWS_AS(emit_scaling({synthetic(Method::PHIF, 1000, 1, 1)}), ConfigError);
    CHECK_THROWS_AS(emit_scaling({synthetic(Method::PHIF, 1000, 1, 1), synthetic(Method::PHIF, 1000, 2, 1)}),
                    ConfigError);
    BenchRow r3 = synthetic(Method::PHIF, 4000, 1, 1);
    r3.dim = 3;
    BenchRow r2 = synthetic(Method::PHIF, 1000, 1, 1);
    r2.dim = 2;
    CHECK_THROWS_AS(emit_scaling({r2, r3}), ConfigError);
  }
  CHECK(loglog_slope({1, 10, 100}, {2, 200, 20000}) == doctest::Approx(2.0));
}
