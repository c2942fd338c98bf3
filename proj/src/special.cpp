#include "qgamp/special.hpp"

#include <cmath>

namespace qgamp::detail {

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double upper_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double log_upper_tail(double x) {
  // erfc(x/sqrt2) stays normal up to x ~ 37.5; past that switch to the
  // asymptotic expansion of the Mills ratio.
  if (x < 36.0) {
    return std::log(0.5 * std::erfc(x / kSqrt2));
  }
  const double x2 = x * x;
  double inv = 1.0 / x2;
  double series = 1.0 + inv * (-1.0 + inv * (3.0 + inv * (-15.0 + inv * 105.0)));
  return -0.5 * x2 - std::log(x) + std::log(kInvSqrt2Pi * series);
}

}  // namespace qgamp::detail
