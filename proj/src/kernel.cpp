#include "sfmm/kernel.hpp"

#include <stdexcept>

namespace sfmm {

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "laplace2d") return KernelFamily::laplace2d;
  if (name == "laplace3d") return KernelFamily::laplace3d;
  if (name == "helmholtz2d") return KernelFamily::helmholtz2d;
  if (name == "helmholtz3d") return KernelFamily::helmholtz3d;
  throw std::invalid_argument("unknown kernel '" + name +
                              "' (expected laplace2d, laplace3d, helmholtz2d or helmholtz3d)");
}

std::string kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::laplace2d: return "laplace2d";
    case KernelFamily::laplace3d: return "laplace3d";
    case KernelFamily::helmholtz2d: return "helmholtz2d";
    case KernelFamily::helmholtz3d: return "helmholtz3d";
  }
  return "?";
}

cplx eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  const int d = spec.dim();
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
    throw std::invalid_argument("eval_kernel: point dimension does not match the kernel");
  if (spec.is_complex() && !(spec.kappa > 0.0))
    throw std::invalid_argument("eval_kernel: Helmholtz needs kappa > 0");
  double r2 = 0;
  for (int k = 0; k < d; ++k) {
    const double dx = x[k] - y[k];
    r2 += dx * dx;
  }
  if (r2 == 0.0)
    throw DuplicatePointError("eval_kernel: coincident evaluation points");
  return dispatch_kernel(spec, [&](auto kern) -> cplx { return cplx(kern.from_r2(r2)); });
}

}  // namespace sfmm
