#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfmm/common.hpp"
#include "sfmm/kernel.hpp"
#include "sfmm/skeleton.hpp"

namespace sfmm {

enum class Distribution { square, annulus, cube, sphere };

Distribution parse_distribution(const std::string& name);
std::string distribution_name(Distribution dist);
int distribution_dim(Distribution dist);

// Leaf capacity used when the caller passes 0: tuned per geometry so the
// default runs land in the O(N) regime.
int default_leaf_cap(Distribution dist);

// Deterministic across platforms: mt19937_64 with fixed bit-to-double maps,
// so a (dist, n, seed) triple always names the same instance.
PointSet generate_points(Distribution dist, std::int64_t n, std::uint64_t seed);
std::vector<double> generate_charges(std::int64_t n, std::uint64_t seed);
std::vector<cplx> generate_charges_complex(std::int64_t n, std::uint64_t seed);

// Strictly dim numeric columns per line, comma or whitespace separated;
// blank lines are skipped.  Throws std::runtime_error naming the bad line.
PointSet load_points_csv(const std::string& path, int dim);

struct BenchConfig {
  KernelSpec kernel;
  Distribution dist = Distribution::square;
  std::int64_t n = 10000;
  double tol = 1e-6;
  int leaf_cap = 0;           // 0 -> distribution default
  std::uint64_t seed = 1;
  std::int64_t n_check = 1000;  // <0 checks all targets, 0 skips the check
  int threads = 0;             // 0 keeps the runtime default
  ProxyConfig proxy;
  PointSet points;  // when non-empty, used instead of (dist, n, seed)
};

struct BenchReport {
  std::string kernel;
  double kappa = 0;
  std::string dist;
  std::int64_t n = 0;
  int leaf_cap = 0;
  double tol = 0;
  std::uint64_t seed = 0;

  int depth = 0;
  std::int64_t n_boxes = 0;
  std::int64_t n_leaves = 0;
  std::vector<std::int64_t> boxes_per_level;
  std::int64_t n_neigh_max = 0;   // widest colleague list
  std::int64_t n_coarse_max = 0;  // widest coarse list

  int k_max = 0;
  std::int64_t m_proj_bytes = 0;  // interpolation operator storage

  std::int64_t n_ifo_pairs = 0;
  std::int64_t n_ifs_pairs = 0;
  std::int64_t n_tfo_pairs = 0;
  bool direct_fallback = false;

  double t_tree = 0;   // seconds: build + neighbor lists
  double t_skel = 0;   // seconds: skeletonization + plan
  double t_apply = 0;  // seconds: one matrix apply
  double t_check = 0;  // seconds: reference sum over checked targets

  std::int64_t n_check = 0;  // targets actually checked
  double relerr = -1;        // -1 when the check was skipped

  std::vector<std::string> warnings;
};

// Benchmark stage failures carry the stage name so the CLI can report where
// a run died.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

BenchReport run_benchmark(const BenchConfig& cfg);

std::string report_to_json(const BenchReport& report);
BenchReport report_from_json(const std::string& text);

void print_summary(const BenchReport& report, std::ostream& os);

}  // namespace sfmm
