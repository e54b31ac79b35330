#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sfmm/common.hpp"
#include "sfmm/kernel.hpp"

namespace sfmm {

// Dense reference sum u_i = sum_{j != i} G(x_i, x_j) q_j over the points in
// their given order.  Coincident points with distinct indices raise
// DuplicatePointError.
template <class K>
std::vector<typename K::scalar> direct_sum(const K& kernel, const PointSet& pts,
                                           const std::vector<typename K::scalar>& q);

// Same sum restricted to the listed target indices.  Row i of the result is
// bit-identical to row targets[i] of direct_sum.
template <class K>
std::vector<typename K::scalar> direct_sum_subset(const K& kernel, const PointSet& pts,
                                                  const std::vector<typename K::scalar>& q,
                                                  std::span<const std::int32_t> targets);

// max_i |u_i - ref_i| / max_i |ref_i|.  Throws std::domain_error when the
// reference is identically zero and std::invalid_argument on length mismatch.
template <class T>
double max_rel_err(const std::vector<T>& u, const std::vector<T>& ref) {
  if (u.size() != ref.size())
    throw std::invalid_argument("max_rel_err: length mismatch");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num = std::max(num, std::sqrt(abs_sq(u[i] - ref[i])));
    den = std::max(den, std::sqrt(abs_sq(ref[i])));
  }
  if (den == 0.0) throw std::domain_error("max_rel_err: reference is identically zero");
  return num / den;
}

}  // namespace sfmm
