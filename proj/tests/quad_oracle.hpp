#pragma once

// Adaptive-Simpson reference for truncated Gaussian moments. Deliberately
// avoids the erf-based closed forms in the library so the two routes stay
// independent; everything here is plain numerical integration of the
// density over the standardized cell.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "qgamp/quantizer.hpp"

namespace testoracle {

inline double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol_abs, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol_abs) return left + right + delta / 15.0;
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol_abs, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * tol_abs, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol_abs) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  return adapt(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol_abs, 64);
}

struct Moments {
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Moments of t ~ N(mu, v) restricted to `cells` by adaptive quadrature.
inline Moments trunc_moments(const qgamp::CellSet& cells, double mu, double v) {
  const double sd = std::sqrt(v);
  const double clip = 40.0;  // the density underflows well before 40 sigma

  struct Part {
    double mass, mean, var;
  };
  std::vector<Part> parts;
  double total = 0.0;
  for (const auto& iv : cells.intervals()) {
    double a = std::isfinite(iv.lo) ? (iv.lo - mu) / sd : -clip;
    double b = std::isfinite(iv.hi) ? (iv.hi - mu) / sd : clip;
    a = std::clamp(a, -clip, clip);
    b = std::clamp(b, -clip, clip);
    if (!(a < b)) continue;
    const double c = 0.5 * (a + b);
    auto density = [](double t) { return 0.3989422804014326779 * std::exp(-0.5 * t * t); };
    // Coarse pass to fix the absolute tolerance scale, then refine.
    double scale = 0.0;
    const int coarse = 64;
    for (int k = 0; k < coarse; ++k) {
      const double t = a + (b - a) * (k + 0.5) / coarse;
      scale += density(t) * (b - a) / coarse;
    }
    scale = std::max(scale, 1e-320);
    const double span = b - a;
    const double m0 =
        integrate([&](double t) { return density(t); }, a, b, 1e-13 * scale);
    if (m0 <= 0.0) continue;
    const double m1 = integrate([&](double t) { return (t - c) * density(t); }, a, b,
                                1e-13 * scale * span);
    const double m2 = integrate([&](double t) { return (t - c) * (t - c) * density(t); }, a, b,
                                1e-13 * scale * span * span);
    const double off = m1 / m0;
    parts.push_back({m0, c + off, m2 / m0 - off * off});
    total += m0;
  }

  Moments out;
  out.mass = total;
  if (total <= 0.0) return out;
  double mean_std = 0.0;
  for (const auto& p : parts) mean_std += p.mass * p.mean;
  mean_std /= total;
  double var_std = 0.0;
  for (const auto& p : parts) {
    const double d = p.mean - mean_std;
    var_std += p.mass * (p.var + d * d);
  }
  var_std /= total;
  out.mean = mu + sd * mean_std;
  out.variance = v * var_std;
  return out;
}

}  // namespace testoracle
