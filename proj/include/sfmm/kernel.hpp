#pragma once

#include <cmath>
#include <span>
#include <string>

#include "sfmm/common.hpp"
#include "sfmm/matrix.hpp"

namespace sfmm {

enum class KernelFamily { laplace2d, laplace3d, helmholtz2d, helmholtz3d };

struct KernelSpec {
  KernelFamily family = KernelFamily::laplace2d;
  double kappa = 1.0;  // wavenumber, ignored by the Laplace kernels

  int dim() const {
    return (family == KernelFamily::laplace2d || family == KernelFamily::helmholtz2d) ? 2 : 3;
  }
  bool is_complex() const {
    return family == KernelFamily::helmholtz2d || family == KernelFamily::helmholtz3d;
  }
};

KernelFamily parse_kernel_family(const std::string& name);
std::string kernel_family_name(KernelFamily family);

// First-kind Hankel function of order zero, J0(x) + i Y0(x), for x > 0.
cplx hankel0(double x);

// Pointwise kernel value; Laplace values carry a zero imaginary part.
// Coincident points raise DuplicatePointError, a size mismatch with the
// kernel dimension raises std::invalid_argument.
cplx eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

// Typed kernels used on the hot paths.  from_r2 maps the squared
// target-source distance to the kernel value; the callers handle the
// zero-distance diagonal before calling it.
struct Laplace2d {
  using scalar = double;
  static constexpr int dim = 2;
  scalar from_r2(double r2) const { return std::log(r2) * (-1.0 / (4.0 * kPi)); }
};

struct Laplace3d {
  using scalar = double;
  static constexpr int dim = 3;
  scalar from_r2(double r2) const { return 1.0 / (4.0 * kPi * std::sqrt(r2)); }
};

struct Helmholtz2d {
  using scalar = cplx;
  static constexpr int dim = 2;
  double kappa = 1.0;
  scalar from_r2(double r2) const {
    const cplx h = hankel0(kappa * std::sqrt(r2));
    return {-0.25 * h.imag(), 0.25 * h.real()};  // (i/4) H0
  }
};

struct Helmholtz3d {
  using scalar = cplx;
  static constexpr int dim = 3;
  double kappa = 1.0;
  scalar from_r2(double r2) const {
    const double r = std::sqrt(r2);
    const double kr = kappa * r;
    return {std::cos(kr) / (4.0 * r), std::sin(kr) / (4.0 * r)};
  }
};

// Runs f with the typed kernel matching spec.  f must return the same type
// for every kernel.
template <class F>
auto dispatch_kernel(const KernelSpec& spec, F&& f) {
  switch (spec.family) {
    case KernelFamily::laplace2d:
      return f(Laplace2d{});
    case KernelFamily::laplace3d:
      return f(Laplace3d{});
    case KernelFamily::helmholtz2d:
      return f(Helmholtz2d{spec.kappa});
    case KernelFamily::helmholtz3d:
      return f(Helmholtz3d{spec.kappa});
  }
  throw std::invalid_argument("dispatch_kernel: bad kernel family");
}

// Dense block A[t][s] = G(x_t, x_s) over global point indices; entries with
// equal target and source index are zero.  Distinct indices at coincident
// coordinates raise DuplicatePointError.
template <class K>
Matrix<typename K::scalar> eval_block(const K& kernel, const PointSet& pts,
                                      std::span<const std::int32_t> targets,
                                      std::span<const std::int32_t> sources) {
  Matrix<typename K::scalar> a(static_cast<std::int64_t>(targets.size()),
                               static_cast<std::int64_t>(sources.size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double* xt = pts[targets[i]];
    auto* row = a.row(static_cast<std::int64_t>(i));
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const double* xs = pts[sources[j]];
      double r2 = 0;
      for (int d = 0; d < pts.dim; ++d) {
        const double dx = xt[d] - xs[d];
        r2 += dx * dx;
      }
      if (r2 == 0.0) {
        if (targets[i] == sources[j]) continue;  // row stays zero there
        throw DuplicatePointError("eval_block: coincident points with distinct indices");
      }
      row[j] = kernel.from_r2(r2);
    }
  }
  return a;
}

}  // namespace sfmm
