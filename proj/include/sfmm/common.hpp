#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace sfmm {

using cplx = std::complex<double>;
using BoxId = std::int32_t;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Exact coordinate duplicates would make the tree recursion unbounded, so
// they are rejected at ingestion and whenever a kernel block hits them.
class DuplicatePointError : public std::domain_error {
 public:
  explicit DuplicatePointError(const std::string& what) : std::domain_error(what) {}
};

// Raised when subdivision would exceed the Morton code budget
// (31 levels in 2d, 21 in 3d).
class DepthExceededError : public std::runtime_error {
 public:
  explicit DepthExceededError(const std::string& what) : std::runtime_error(what) {}
};

// Interleaved coordinate storage, dim doubles per point.
struct PointSet {
  int dim = 0;
  std::vector<double> coords;

  std::int64_t size() const {
    return dim ? static_cast<std::int64_t>(coords.size()) / dim : 0;
  }
  const double* operator[](std::int64_t i) const { return coords.data() + i * dim; }
  double* operator[](std::int64_t i) { return coords.data() + i * dim; }
};

template <class T>
struct is_complex_scalar : std::false_type {};
template <>
struct is_complex_scalar<cplx> : std::true_type {};

inline double conj_scalar(double x) { return x; }
inline cplx conj_scalar(const cplx& x) { return std::conj(x); }

inline double abs_sq(double x) { return x * x; }
inline double abs_sq(const cplx& x) {
  return x.real() * x.real() + x.imag() * x.imag();
}

}  // namespace sfmm
