#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sfmm/bench.hpp"

using namespace sfmm;

namespace {

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& body) : path(name) {
    std::ofstream out(path);
    out << body;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("point generators are deterministic and land in their domains") {
  for (const Distribution dist :
       {Distribution::square, Distribution::annulus, Distribution::cube, Distribution::sphere}) {
    const PointSet a = generate_points(dist, 2000, 42);
    const PointSet b = generate_points(dist, 2000, 42);
    CHECK(a.coords == b.coords);
    const PointSet c = generate_points(dist, 2000, 43);
    CHECK(a.coords != c.coords);
    CHECK(a.dim == distribution_dim(dist));

    const std::int64_t n = a.size();
    if (dist == Distribution::square || dist == Distribution::cube) {
      for (double v : a.coords) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
      }
    } else if (dist == Distribution::sphere) {
      for (std::int64_t i = 0; i < n; ++i) {
        const double* x = a[i];
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        CHECK(std::abs(r - 1.0) <= 1e-12);
      }
    } else {
      for (std::int64_t i = 0; i < n; ++i) {
        const double* x = a[i];
        const double r = std::hypot(x[0], x[1]);
        CHECK(r >= 0.70);
        CHECK(r <= 1.30);
      }
    }
  }
  CHECK_THROWS_AS(generate_points(Distribution::square, 0, 1), std::invalid_argument);
}

TEST_CASE("charge generators draw standard normals") {
  const std::int64_t n = 20000;
  const auto q = generate_charges(n, 7);
  CHECK(q == generate_charges(n, 7));
  double mean = 0, var = 0;
  for (double v : q) mean += v;
  mean /= static_cast<double>(n);
  for (double v : q) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  CHECK(std::abs(mean) < 0.05);
  CHECK(var > 0.9);
  CHECK(var < 1.1);

  const auto cq = generate_charges_complex(n, 7);
  CHECK(cq == generate_charges_complex(n, 7));
  double mr = 0, mi = 0;
  for (const cplx& v : cq) {
    mr += v.real();
    mi += v.imag();
  }
  CHECK(std::abs(mr / static_cast<double>(n)) < 0.05);
  CHECK(std::abs(mi / static_cast<double>(n)) < 0.05);
}

TEST_CASE("distribution names, dims and leaf defaults") {
  for (const std::string name : {"square", "annulus", "cube", "sphere"})
    CHECK(distribution_name(parse_distribution(name)) == name);
  CHECK_THROWS_AS(parse_distribution("donut"), std::invalid_argument);
  CHECK(default_leaf_cap(Distribution::square) == 100);
  CHECK(default_leaf_cap(Distribution::annulus) == 100);
  CHECK(default_leaf_cap(Distribution::cube) == 320);
  CHECK(default_leaf_cap(Distribution::sphere) == 200);
}

TEST_CASE("csv loader accepts commas, whitespace and blank lines") {
  TempFile f("pts_ok.csv",
             "0.1, 0.2\n"
             "\n"
             "  0.3\t0.4\n"
             "0.5,0.6\n");
  const PointSet ps = load_points_csv(f.path, 2);
  REQUIRE(ps.size() == 3);
  CHECK(ps.coords == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
}

TEST_CASE("csv loader rejects malformed input with the offending line") {
  TempFile wide("pts_wide.csv", "0.1 0.2\n0.3 0.4 0.5\n");
  CHECK_THROWS_WITH_AS(load_points_csv(wide.path, 2),
                       doctest::Contains("pts_wide.csv:2"), std::runtime_error);

  TempFile junk("pts_junk.csv", "0.1 abc\n");
  CHECK_THROWS_AS(load_points_csv(junk.path, 2), std::runtime_error);

  TempFile blank("pts_blank.csv", "\n   \n");
  CHECK_THROWS_WITH_AS(load_points_csv(blank.path, 2), doctest::Contains("no points"),
                       std::runtime_error);

  CHECK_THROWS_AS(load_points_csv("does_not_exist.csv", 2), std::runtime_error);
  TempFile ok("pts_dim.csv", "0.1 0.2\n");
  CHECK_THROWS_AS(load_points_csv(ok.path, 4), std::invalid_argument);
}

TEST_CASE("report json round trips exactly") {
  BenchConfig cfg;
  cfg.kernel.family = KernelFamily::laplace2d;
  cfg.dist = Distribution::square;
  cfg.n = 1500;
  cfg.tol = 1e-5;
  cfg.seed = 9;
  cfg.n_check = 50;
  const BenchReport r = run_benchmark(cfg);
  const std::string j1 = report_to_json(r);
  const BenchReport back = report_from_json(j1);
  CHECK(report_to_json(back) == j1);
  CHECK(back.n == r.n);
  CHECK(back.relerr == r.relerr);
  CHECK(back.boxes_per_level == r.boxes_per_level);

  CHECK_THROWS_AS(report_from_json("{\"kernel\": \"laplace2d\"}"), std::exception);
}

TEST_CASE("an end-to-end benchmark run meets its tolerance and fills the report") {
  BenchConfig cfg;
  cfg.kernel.family = KernelFamily::laplace2d;
  cfg.dist = Distribution::square;
  cfg.n = 2000;
  cfg.tol = 1e-6;
  cfg.leaf_cap = 64;
  cfg.seed = 3;
  cfg.n_check = -1;  // check every target
  const BenchReport r = run_benchmark(cfg);

  CHECK(r.kernel == "laplace2d");
  CHECK(r.dist == "square");
  CHECK(r.n == 2000);
  CHECK(r.leaf_cap == 64);
  CHECK(r.depth >= 2);
  CHECK(r.n_boxes > 0);
  CHECK(r.n_leaves > 0);
  std::int64_t sum = 0;
  for (std::int64_t c : r.boxes_per_level) sum += c;
  CHECK(sum == r.n_boxes);
  CHECK(static_cast<int>(r.boxes_per_level.size()) == r.depth + 1);
  CHECK(r.n_neigh_max > 0);
  CHECK(r.k_max > 0);
  CHECK(r.m_proj_bytes > 0);
  CHECK(r.n_ifo_pairs > 0);
  CHECK(r.n_ifs_pairs == r.n_tfo_pairs);
  CHECK(!r.direct_fallback);
  CHECK(r.t_tree >= 0.0);
  CHECK(r.t_skel > 0.0);
  CHECK(r.t_apply > 0.0);
  CHECK(r.t_check > 0.0);
  CHECK(r.n_check == 2000);
  CHECK(r.relerr >= 0.0);
  CHECK(r.relerr <= 1e-5);
  CHECK(r.warnings.empty());
}

TEST_CASE("custom point clouds replace the generator") {
  BenchConfig cfg;
  cfg.kernel.family = KernelFamily::laplace2d;
  cfg.points = generate_points(Distribution::square, 1200, 5);
  cfg.n = 0;  // ignored when points are supplied
  cfg.tol = 1e-4;
  cfg.leaf_cap = 40;
  cfg.n_check = -1;
  const BenchReport r = run_benchmark(cfg);
  CHECK(r.n == 1200);
  CHECK(r.relerr <= 1e-3);
}

TEST_CASE("a single point skips the error check and warns") {
  BenchConfig cfg;
  cfg.kernel.family = KernelFamily::laplace2d;
  cfg.dist = Distribution::square;
  cfg.n = 1;
  cfg.tol = 1e-6;
  cfg.n_check = -1;
  const BenchReport r = run_benchmark(cfg);
  CHECK(r.relerr == -1.0);
  CHECK(r.direct_fallback);
  CHECK(r.warnings.size() >= 2);
}

TEST_CASE("skipping the check leaves the sentinel in place") {
  BenchConfig cfg;
  cfg.kernel.family = KernelFamily::laplace2d;
  cfg.dist = Distribution::square;
  cfg.n = 1500;
  cfg.tol = 1e-4;
  cfg.n_check = 0;
  const BenchReport r = run_benchmark(cfg);
  CHECK(r.relerr == -1.0);
  CHECK(r.n_check == 0);
  CHECK(r.t_check == 0.0);
}

TEST_CASE("config stage failures name the config stage") {
  BenchConfig cfg;
  cfg.kernel.family = KernelFamily::helmholtz2d;
  cfg.kernel.kappa = 0.0;
  cfg.dist = Distribution::square;
  cfg.n = 100;
  CHECK_THROWS_AS(run_benchmark(cfg), StageError);
  try {
    run_benchmark(cfg);
  } catch (const StageError& e) {
    CHECK(e.stage() == "config");
  }

  cfg.kernel.kappa = 1.0;
  cfg.tol = 0.6;
  CHECK_THROWS_AS(run_benchmark(cfg), StageError);
  cfg.tol = 1e-6;
  cfg.threads = -1;
  CHECK_THROWS_AS(run_benchmark(cfg), StageError);
  cfg.threads = 0;
  cfg.leaf_cap = -2;
  CHECK_THROWS_AS(run_benchmark(cfg), StageError);
}

TEST_CASE("geometry and kernel dimension clashes fail in the generate stage") {
  BenchConfig cfg;
  cfg.kernel.family = KernelFamily::laplace2d;
  cfg.dist = Distribution::cube;
  cfg.n = 100;
  try {
    run_benchmark(cfg);
    CHECK(false);
  } catch (const StageError& e) {
    CHECK(e.stage() == "generate");
  }

  cfg.dist = Distribution::square;
  cfg.points = generate_points(Distribution::cube, 100, 1);
  try {
    run_benchmark(cfg);
    CHECK(false);
  } catch (const StageError& e) {
    CHECK(e.stage() == "generate");
  }
}
