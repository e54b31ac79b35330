#include "sfmm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"
#include "sfmm/apply.hpp"
#include "sfmm/oracle.hpp"
#include "sfmm/tree.hpp"

namespace sfmm {

namespace {

// Stream separation keeps points, charges and check targets independent of
// each other for a shared user seed.
constexpr std::uint64_t kChargeStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kCheckStream = 0xc2b2ae3d27d4eb4fULL;

double next_unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// (0, 1]; keeps log() finite in the Box-Muller transform.
double next_unit_pos(std::mt19937_64& g) {
  return static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;
}

void fill_normals(std::mt19937_64& g, double* out, std::int64_t n) {
  for (std::int64_t i = 0; i < n; i += 2) {
    const double u1 = next_unit_pos(g);
    const double u2 = next_unit(g);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    out[i] = rad * std::cos(2.0 * kPi * u2);
    if (i + 1 < n) out[i + 1] = rad * std::sin(2.0 * kPi * u2);
  }
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// First m entries of a seeded permutation of 0..n-1, sorted ascending.
std::vector<std::int32_t> sample_targets(std::int64_t n, std::int64_t m, std::uint64_t seed) {
  std::vector<std::int32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 g(seed);
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t j = i + static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

Distribution parse_distribution(const std::string& name) {
  if (name == "square") return Distribution::square;
  if (name == "annulus") return Distribution::annulus;
  if (name == "cube") return Distribution::cube;
  if (name == "sphere") return Distribution::sphere;
  throw std::invalid_argument("unknown distribution: " + name);
}

std::string distribution_name(Distribution dist) {
  switch (dist) {
    case Distribution::square: return "square";
    case Distribution::annulus: return "annulus";
    case Distribution::cube: return "cube";
    case Distribution::sphere: return "sphere";
  }
  throw std::invalid_argument("distribution_name: bad value");
}

int distribution_dim(Distribution dist) {
  return (dist == Distribution::square || dist == Distribution::annulus) ? 2 : 3;
}

int default_leaf_cap(Distribution dist) {
  switch (dist) {
    case Distribution::square: return 100;
    case Distribution::annulus: return 100;
    case Distribution::cube: return 320;
    case Distribution::sphere: return 200;
  }
  throw std::invalid_argument("default_leaf_cap: bad value");
}

PointSet generate_points(Distribution dist, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_points: need at least one point");
  std::mt19937_64 g(seed);
  PointSet ps;
  ps.dim = distribution_dim(dist);
  ps.coords.resize(static_cast<std::size_t>(n) * ps.dim);
  switch (dist) {
    case Distribution::square:
      for (std::int64_t i = 0; i < n; ++i) {
        ps.coords[2 * i] = next_unit(g);
        ps.coords[2 * i + 1] = next_unit(g);
      }
      break;
    case Distribution::annulus:
      // Wavy ring of mean radius 1 with 10% radial jitter.
      for (std::int64_t i = 0; i < n; ++i) {
        const double theta = 2.0 * kPi * next_unit(g);
        const double eta = (next_unit(g) - 0.5) * 0.1;
        const double r = 1.0 + 0.25 * std::cos(5.0 * theta) + eta;
        ps.coords[2 * i] = r * std::cos(theta);
        ps.coords[2 * i + 1] = r * std::sin(theta);
      }
      break;
    case Distribution::cube:
      for (std::int64_t i = 0; i < n; ++i) {
        ps.coords[3 * i] = next_unit(g);
        ps.coords[3 * i + 1] = next_unit(g);
        ps.coords[3 * i + 2] = next_unit(g);
      }
      break;
    case Distribution::sphere:
      // Area-uniform on the unit sphere surface.
      for (std::int64_t i = 0; i < n; ++i) {
        const double z = 2.0 * next_unit(g) - 1.0;
        const double phi = 2.0 * kPi * next_unit(g);
        const double s = std::sqrt(1.0 - z * z);
        ps.coords[3 * i] = s * std::cos(phi);
        ps.coords[3 * i + 1] = s * std::sin(phi);
        ps.coords[3 * i + 2] = z;
      }
      break;
  }
  return ps;
}

std::vector<double> generate_charges(std::int64_t n, std::uint64_t seed) {
  std::vector<double> q(n);
  std::mt19937_64 g(seed);
  fill_normals(g, q.data(), n);
  return q;
}

std::vector<cplx> generate_charges_complex(std::int64_t n, std::uint64_t seed) {
  std::vector<double> parts(2 * n);
  std::mt19937_64 g(seed);
  fill_normals(g, parts.data(), 2 * n);
  std::vector<cplx> q(n);
  for (std::int64_t i = 0; i < n; ++i) q[i] = {parts[2 * i], parts[2 * i + 1]};
  return q;
}

PointSet load_points_csv(const std::string& path, int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("load_points_csv: dim must be 2 or 3");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_points_csv: cannot open " + path);
  PointSet ps;
  ps.dim = dim;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    double v;
    int got = 0;
    while (is >> v) {
      if (got < dim) ps.coords.push_back(v);
      ++got;
    }
    if (got == 0) continue;  // blank line
    if (got != dim || !is.eof())
      throw std::runtime_error("load_points_csv: " + path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(dim) + " numeric columns");
    for (int k = 0; k < dim; ++k)
      if (!std::isfinite(ps.coords[ps.coords.size() - dim + k]))
        throw std::runtime_error("load_points_csv: " + path + ":" + std::to_string(lineno) +
                                 ": non-finite coordinate");
  }
  if (ps.coords.empty()) throw std::runtime_error("load_points_csv: " + path + ": no points");
  return ps;
}

BenchReport run_benchmark(const BenchConfig& cfg) {
  const KernelSpec spec = cfg.kernel;
  if (spec.is_complex() && !(spec.kappa > 0))
    throw StageError("config", "wavenumber must be positive");
  if (!(cfg.tol > 0 && cfg.tol < 0.5))
    throw StageError("config", "tolerance must lie in (0, 0.5)");
  if (cfg.threads < 0) throw StageError("config", "thread count must be non-negative");
  const int b = cfg.leaf_cap != 0 ? cfg.leaf_cap : default_leaf_cap(cfg.dist);
  if (b < 1) throw StageError("config", "leaf capacity must be at least 1");
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

  BenchReport rep;
  rep.kernel = kernel_family_name(spec.family);
  rep.kappa = spec.is_complex() ? spec.kappa : 0.0;
  rep.leaf_cap = b;
  rep.tol = cfg.tol;
  rep.seed = cfg.seed;

  PointSet pts;
  try {
    if (cfg.points.size() > 0) {
      if (cfg.points.dim != spec.dim())
        throw std::invalid_argument("point dimension does not match the kernel");
      pts = cfg.points;
      rep.dist = "csv";
    } else {
      if (distribution_dim(cfg.dist) != spec.dim())
        throw std::invalid_argument("distribution dimension does not match the kernel");
      pts = generate_points(cfg.dist, cfg.n, cfg.seed);
      rep.dist = distribution_name(cfg.dist);
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("generate", e.what());
  }
  rep.n = pts.size();

  Tree tree;
  NeighborLists nb;
  try {
    Timer t;
    tree = build_tree(pts, b);
    nb = build_neighbor_lists(tree);
    rep.t_tree = t.seconds();
  } catch (const std::exception& e) {
    throw StageError("tree", e.what());
  }
  rep.depth = tree.depth;
  rep.n_boxes = tree.n_boxes();
  rep.n_leaves = tree.n_leaves();
  rep.boxes_per_level.resize(tree.depth + 1);
  for (int l = 0; l <= tree.depth; ++l)
    rep.boxes_per_level[l] = tree.level_begin[l + 1] - tree.level_begin[l];
  for (const auto& v : nb.colleagues)
    rep.n_neigh_max = std::max(rep.n_neigh_max, static_cast<std::int64_t>(v.size()));
  for (const auto& v : nb.coarse)
    rep.n_coarse_max = std::max(rep.n_coarse_max, static_cast<std::int64_t>(v.size()));
  if (tree.depth < 2)
    rep.warnings.push_back("tree depth below 2: the run used the dense direct fallback");

  dispatch_kernel(spec, [&](auto kern) {
    using K = decltype(kern);
    using S = typename K::scalar;

    SkeletonSet<S> skel;
    ApplyPlan<K> plan;
    try {
      Timer t;
      skel = build_skeletons(tree, kern, cfg.tol, cfg.proxy);
      plan = make_plan(kern, tree, nb, skel);
      rep.t_skel = t.seconds();
    } catch (const std::exception& e) {
      throw StageError("skeleton", e.what());
    }
    rep.k_max = skel.k_max;
    rep.m_proj_bytes = skel.proj_scalars * static_cast<std::int64_t>(sizeof(S));
    if (skel.saturated_boxes > 0)
      rep.warnings.push_back(std::to_string(skel.saturated_boxes) +
                             " boxes hit the proxy rank budget; accuracy may land short");

    std::vector<S> q;
    if constexpr (is_complex_scalar<S>::value)
      q = generate_charges_complex(rep.n, cfg.seed ^ kChargeStream);
    else
      q = generate_charges(rep.n, cfg.seed ^ kChargeStream);

    std::vector<S> u;
    ApplyStats stats;
    try {
      Timer t;
      u = fmm_apply(plan, q, &stats);
      rep.t_apply = t.seconds();
    } catch (const std::exception& e) {
      throw StageError("apply", e.what());
    }
    rep.n_ifo_pairs = stats.n_ifo_pairs;
    rep.n_ifs_pairs = stats.n_ifs_pairs;
    rep.n_tfo_pairs = stats.n_tfo_pairs;
    rep.direct_fallback = stats.direct_fallback;

    if (cfg.n_check != 0) {
      try {
        Timer t;
        if (cfg.n_check < 0 || cfg.n_check >= rep.n) {
          const std::vector<S> ref = direct_sum(kern, pts, q);
          rep.relerr = max_rel_err(u, ref);
          rep.n_check = rep.n;
        } else {
          const std::vector<std::int32_t> targets =
              sample_targets(rep.n, cfg.n_check, cfg.seed ^ kCheckStream);
          const std::vector<S> ref = direct_sum_subset(kern, pts, q, targets);
          std::vector<S> usub(targets.size());
          for (std::size_t i = 0; i < targets.size(); ++i) usub[i] = u[targets[i]];
          rep.relerr = max_rel_err(usub, ref);
          rep.n_check = cfg.n_check;
        }
        rep.t_check = t.seconds();
      } catch (const DuplicatePointError& e) {
        throw StageError("check", e.what());
      } catch (const std::domain_error&) {
        rep.relerr = -1;
        rep.n_check = 0;
        rep.warnings.push_back("reference potentials identically zero; error check skipped");
      } catch (const std::exception& e) {
        throw StageError("check", e.what());
      }
    }
  });
  return rep;
}

std::string report_to_json(const BenchReport& r) {
  nlohmann::json j;
  j["kernel"] = r.kernel;
  j["kappa"] = r.kappa;
  j["dist"] = r.dist;
  j["N"] = r.n;
  j["b"] = r.leaf_cap;
  j["tol"] = r.tol;
  j["seed"] = r.seed;
  j["depth"] = r.depth;
  j["n_boxes"] = r.n_boxes;
  j["n_leaves"] = r.n_leaves;
  j["boxes_per_level"] = r.boxes_per_level;
  j["n_neigh_max"] = r.n_neigh_max;
  j["n_coarse_max"] = r.n_coarse_max;
  j["k_max"] = r.k_max;
  j["M_proj"] = r.m_proj_bytes;
  j["n_ifo_pairs"] = r.n_ifo_pairs;
  j["n_ifs_pairs"] = r.n_ifs_pairs;
  j["n_tfo_pairs"] = r.n_tfo_pairs;
  j["direct_fallback"] = r.direct_fallback;
  j["T_tree"] = r.t_tree;
  j["T_skel"] = r.t_skel;
  j["T_apply"] = r.t_apply;
  j["T_check"] = r.t_check;
  j["n_check"] = r.n_check;
  j["relerr"] = r.relerr;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

BenchReport report_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  BenchReport r;
  r.kernel = j.at("kernel").get<std::string>();
  r.kappa = j.at("kappa").get<double>();
  r.dist = j.at("dist").get<std::string>();
  r.n = j.at("N").get<std::int64_t>();
  r.leaf_cap = j.at("b").get<int>();
  r.tol = j.at("tol").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.depth = j.at("depth").get<int>();
  r.n_boxes = j.at("n_boxes").get<std::int64_t>();
  r.n_leaves = j.at("n_leaves").get<std::int64_t>();
  r.boxes_per_level = j.at("boxes_per_level").get<std::vector<std::int64_t>>();
  r.n_neigh_max = j.at("n_neigh_max").get<std::int64_t>();
  r.n_coarse_max = j.at("n_coarse_max").get<std::int64_t>();
  r.k_max = j.at("k_max").get<int>();
  r.m_proj_bytes = j.at("M_proj").get<std::int64_t>();
  r.n_ifo_pairs = j.at("n_ifo_pairs").get<std::int64_t>();
  r.n_ifs_pairs = j.at("n_ifs_pairs").get<std::int64_t>();
  r.n_tfo_pairs = j.at("n_tfo_pairs").get<std::int64_t>();
  r.direct_fallback = j.at("direct_fallback").get<bool>();
  r.t_tree = j.at("T_tree").get<double>();
  r.t_skel = j.at("T_skel").get<double>();
  r.t_apply = j.at("T_apply").get<double>();
  r.t_check = j.at("T_check").get<double>();
  r.n_check = j.at("n_check").get<std::int64_t>();
  r.relerr = j.at("relerr").get<double>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

void print_summary(const BenchReport& r, std::ostream& os) {
  os << "kernel=" << r.kernel;
  if (r.kappa > 0) os << " kappa=" << r.kappa;
  os << " dist=" << r.dist << " N=" << r.n << " b=" << r.leaf_cap << " tol=" << r.tol << "\n";
  os << "depth=" << r.depth << " boxes=" << r.n_boxes << " leaves=" << r.n_leaves
     << " k_max=" << r.k_max << " M_proj=" << r.m_proj_bytes << " bytes\n";
  os << "pairs: ifo=" << r.n_ifo_pairs << " ifs=" << r.n_ifs_pairs << " tfo=" << r.n_tfo_pairs;
  if (r.direct_fallback) os << " (direct fallback)";
  os << "\n";
  os << "T_tree=" << r.t_tree << "s T_skel=" << r.t_skel << "s T_apply=" << r.t_apply << "s\n";
  if (r.n_check > 0)
    os << "relerr=" << r.relerr << " over " << r.n_check << " targets (T_check=" << r.t_check
       << "s)\n";
  else
    os << "relerr: check skipped\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
}

}  // namespace sfmm
