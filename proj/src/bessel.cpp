#include <cmath>
#include <stdexcept>

#include "sfmm/kernel.hpp"

namespace sfmm {

namespace {

constexpr long double kPiL = 3.14159265358979323846264338327950288L;
constexpr long double kEulerGammaL = 0.57721566490153286060651209008240243L;

// Crossover between the ascending series and the large-argument expansion.
// The expansion truncated at its smallest term bottoms out near exp(-2x), so
// the switch has to sit where that floor is already below roughly 1e-11;
// x = 13 gives ~5e-12 while the series, accumulated in extended precision,
// still holds ~1e-13 there.
constexpr double kSwitch = 13.0;

}  // namespace

cplx hankel0(double x) {
  if (!(x > 0.0)) throw std::domain_error("hankel0: argument must be positive");

  if (x <= kSwitch) {
    // J0 = sum (-1)^m (x^2/4)^m / (m!)^2 and the companion log series for Y0.
    // Terms near x = 13 peak around 1e4, so double accumulation would lose
    // four digits to cancellation; long double keeps the result near 1e-13.
    const long double q = static_cast<long double>(x) * x / 4.0L;
    long double term = 1.0L, j0 = 1.0L, ysum = 0.0L, harmonic = 0.0L;
    for (int m = 1; m <= 90; ++m) {
      term *= -q / (static_cast<long double>(m) * m);
      harmonic += 1.0L / m;
      j0 += term;
      ysum -= term * harmonic;  // (-1)^{m+1} H_m q^m / (m!)^2
      if (fabsl(term) < 1e-24L * (1.0L + fabsl(j0))) break;
    }
    const long double y0 =
        (2.0L / kPiL) * ((logl(static_cast<long double>(x) / 2.0L) + kEulerGammaL) * j0 + ysum);
    return {static_cast<double>(j0), static_cast<double>(y0)};
  }

  // H0(x) ~ sqrt(2/(pi x)) e^{i(x - pi/4)} sum_k i^k a_k x^{-k} with
  // a_k = -a_{k-1} (2k-1)^2 / (8k), truncated at the smallest term.
  const long double xl = x;
  long double a = 1.0L;
  long double re = 1.0L, im = 0.0L;
  long double xpow = 1.0L;
  long double prev = 1e300L;
  for (int k = 1; k <= 80; ++k) {
    a *= -static_cast<long double>((2 * k - 1) * (2 * k - 1)) / (8.0L * k);
    xpow *= xl;
    const long double t = a / xpow;
    if (fabsl(t) >= prev) break;  // divergence onset
    prev = fabsl(t);
    switch (k & 3) {
      case 0: re += t; break;
      case 1: im += t; break;
      case 2: re -= t; break;
      case 3: im -= t; break;
    }
    if (fabsl(t) < 1e-24L) break;
  }
  const long double amp = sqrtl(2.0L / (kPiL * xl));
  const long double phase = xl - kPiL / 4.0L;
  const long double c = cosl(phase), s = sinl(phase);
  return {static_cast<double>(amp * (c * re - s * im)),
          static_cast<double>(amp * (s * re + c * im))};
}

}  // namespace sfmm
