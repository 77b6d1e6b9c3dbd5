#pragma once

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>

namespace gale {

/// Modified Bessel function of the second kind K_nu(x). Underflow-safe:
/// returns 0 once exp(-x) leaves the double range.
inline double bessel_k(double nu, double x) {
  if (x > 700.0) return 0.0;
  return boost::math::cyl_bessel_k(nu, x);
}

inline double digamma(double x) { return boost::math::digamma(x); }

inline constexpr double euler_gamma = 0.577215664901532861;

}  // namespace gale
