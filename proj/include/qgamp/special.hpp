#pragma once

namespace qgamp::detail {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
inline constexpr double kSqrt2 = 1.4142135623730950488016887;

/// Standard normal density.
double std_normal_pdf(double x);

/// P(X >= x) for X ~ N(0,1), accurate in both tails.
double upper_tail(double x);

/// log P(X >= x); usable far beyond the underflow point of upper_tail.
double log_upper_tail(double x);

}  // namespace qgamp::detail
