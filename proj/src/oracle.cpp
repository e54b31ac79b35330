#include "sfmm/oracle.hpp"

namespace sfmm {

namespace {

// One output row; j runs ascending over all points so subset rows match the
// full sum bit for bit.
template <class K>
typename K::scalar direct_row(const K& kern, const PointSet& pts,
                              const typename K::scalar* q, std::int64_t i, bool& coincident) {
  constexpr int d = K::dim;
  const double* xi = pts[i];
  typename K::scalar acc{};
  const std::int64_t n = pts.size();
  for (std::int64_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double* xj = pts[j];
    double r2 = 0;
    for (int k = 0; k < d; ++k) {
      const double dx = xi[k] - xj[k];
      r2 += dx * dx;
    }
    if (r2 == 0.0) {
      coincident = true;
      continue;
    }
    acc += kern.from_r2(r2) * q[j];
  }
  return acc;
}

}  // namespace

template <class K>
std::vector<typename K::scalar> direct_sum(const K& kernel, const PointSet& pts,
                                           const std::vector<typename K::scalar>& q) {
  if (pts.dim != K::dim) throw std::invalid_argument("direct_sum: kernel dimension mismatch");
  if (static_cast<std::int64_t>(q.size()) != pts.size())
    throw std::invalid_argument("direct_sum: charge count does not match the point count");
  const std::int64_t n = pts.size();
  std::vector<typename K::scalar> u(n);
  bool coincident = false;
#pragma omp parallel for schedule(static) reduction(|| : coincident)
  for (std::int64_t i = 0; i < n; ++i) u[i] = direct_row(kernel, pts, q.data(), i, coincident);
  if (coincident)
    throw DuplicatePointError("direct_sum: coincident points with distinct indices");
  return u;
}

template <class K>
std::vector<typename K::scalar> direct_sum_subset(const K& kernel, const PointSet& pts,
                                                  const std::vector<typename K::scalar>& q,
                                                  std::span<const std::int32_t> targets) {
  if (pts.dim != K::dim)
    throw std::invalid_argument("direct_sum_subset: kernel dimension mismatch");
  if (static_cast<std::int64_t>(q.size()) != pts.size())
    throw std::invalid_argument("direct_sum_subset: charge count does not match the point count");
  for (const std::int32_t t : targets)
    if (t < 0 || t >= pts.size())
      throw std::invalid_argument("direct_sum_subset: target index out of range");
  const std::int64_t m = static_cast<std::int64_t>(targets.size());
  std::vector<typename K::scalar> u(m);
  bool coincident = false;
#pragma omp parallel for schedule(static) reduction(|| : coincident)
  for (std::int64_t i = 0; i < m; ++i)
    u[i] = direct_row(kernel, pts, q.data(), targets[i], coincident);
  if (coincident)
    throw DuplicatePointError("direct_sum_subset: coincident points with distinct indices");
  return u;
}

template std::vector<double> direct_sum(const Laplace2d&, const PointSet&,
                                        const std::vector<double>&);
template std::vector<double> direct_sum(const Laplace3d&, const PointSet&,
                                        const std::vector<double>&);
template std::vector<cplx> direct_sum(const Helmholtz2d&, const PointSet&,
                                      const std::vector<cplx>&);
template std::vector<cplx> direct_sum(const Helmholtz3d&, const PointSet&,
                                      const std::vector<cplx>&);

template std::vector<double> direct_sum_subset(const Laplace2d&, const PointSet&,
                                               const std::vector<double>&,
                                               std::span<const std::int32_t>);
template std::vector<double> direct_sum_subset(const Laplace3d&, const PointSet&,
                                               const std::vector<double>&,
                                               std::span<const std::int32_t>);
template std::vector<cplx> direct_sum_subset(const Helmholtz2d&, const PointSet&,
                                             const std::vector<cplx>&,
                                             std::span<const std::int32_t>);
template std::vector<cplx> direct_sum_subset(const Helmholtz3d&, const PointSet&,
                                             const std::vector<cplx>&,
                                             std::span<const std::int32_t>);

}  // namespace sfmm
