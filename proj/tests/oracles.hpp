// Test-only reference computations, independent of the library code paths
// they check.
#pragma once

#include <cmath>

namespace oracles {

// Bessel J0 by its power series; accurate for the modest arguments used here.
inline double bessel_j0(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 40; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-18) break;
  }
  return sum;
}

// First positive zero of J0 by bisection.
inline double bessel_j0_zero1() {
  double lo = 2.0, hi = 3.0;
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (lo + hi);
    if (bessel_j0(lo) * bessel_j0(m) <= 0.0)
      hi = m;
    else
      lo = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracles
