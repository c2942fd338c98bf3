#include "qgamp/qdesign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qgamp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> lloyd_default_init(int levels_count, const GaussianSource& src) {
  const double sd = std::sqrt(src.variance);
  std::vector<double> levels(levels_count);
  if (levels_count == 1) {
    levels[0] = src.mean;
    return levels;
  }
  for (int i = 0; i < levels_count; ++i) {
    const double frac = static_cast<double>(i) / (levels_count - 1);
    levels[i] = src.mean + sd * (-3.0 + 6.0 * frac);
  }
  return levels;
}

LloydResult lloyd(int levels_count, const GaussianSource& src, std::vector<double> init_levels,
                  double tol, int max_iters) {
  if (levels_count < 1) throw std::invalid_argument("lloyd: need levels_count >= 1");
  if (static_cast<int>(init_levels.size()) != levels_count)
    throw std::invalid_argument("lloyd: init size mismatch");
  for (std::size_t i = 1; i < init_levels.size(); ++i)
    if (!(init_levels[i - 1] < init_levels[i]))
      throw std::invalid_argument("lloyd: init levels must be strictly increasing");

  std::vector<double> levels = std::move(init_levels);
  std::vector<double> thresholds(levels_count - 1);
  bool converged = false;
  int iters = 0;
  for (; iters < max_iters; ++iters) {
    for (int i = 0; i + 1 < levels_count; ++i) thresholds[i] = 0.5 * (levels[i] + levels[i + 1]);
    double movement = 0.0;
    for (int i = 0; i < levels_count; ++i) {
      const double lo = (i == 0) ? -kInf : thresholds[i - 1];
      const double hi = (i == levels_count - 1) ? kInf : thresholds[i];
      const auto m = trunc_gauss_moments(CellSet({{lo, hi}}), src.mean, src.variance);
      if (m.degenerate) continue;  // empty cell keeps its level
      movement = std::max(movement, std::abs(m.mean - levels[i]));
      levels[i] = m.mean;
    }
    if (movement < tol) {
      converged = true;
      break;
    }
  }
  for (int i = 0; i + 1 < levels_count; ++i) thresholds[i] = 0.5 * (levels[i] + levels[i + 1]);
  return {ScalarQuantizer::regular(thresholds, levels), converged, iters};
}

LloydResult lloyd(int levels_count, const GaussianSource& src, double tol, int max_iters) {
  return lloyd(levels_count, src, lloyd_default_init(levels_count, src), tol, max_iters);
}

ScalarQuantizer make_family_quantizer(FamilyKind family, int k_or_n, double param) {
  switch (family) {
    case FamilyKind::Regular:
      return ScalarQuantizer::uniform_regular(k_or_n, param);
    case FamilyKind::Modulo:
      return ScalarQuantizer::modulo(param, k_or_n);
  }
  throw std::logic_error("unknown family");
}

DesignResult optimize_family(FamilyKind family, int k_or_n, const DesignObjective& objective,
                             const SearchSpec& search) {
  if (!(search.lo > 0.0) || !(search.hi >= search.lo))
    throw std::invalid_argument("optimize_family: need 0 < lo <= hi");
  if (search.grid_points < 1) throw std::invalid_argument("optimize_family: need grid points");

  DesignResult result;
  auto evaluate = [&](double param) {
    const SeProblem prob{objective.beta, objective.sigma2, objective.prior,
                         make_family_quantizer(family, k_or_n, param)};
    const double mse = se_run(prob, objective.se_config).fixed_point;
    result.probes.emplace_back(param, mse);
    return mse;
  };

  // Coarse stage: log-spaced grid.
  const int grid = (search.hi > search.lo) ? search.grid_points : 1;
  const double log_lo = std::log(search.lo);
  const double log_hi = std::log(search.hi);
  int best = -1;
  double best_mse = kInf;
  std::vector<double> params(grid);
  for (int i = 0; i < grid; ++i) {
    const double f = (grid == 1) ? 0.0 : static_cast<double>(i) / (grid - 1);
    params[i] = std::exp(log_lo + f * (log_hi - log_lo));
    const double mse = evaluate(params[i]);
    if (mse < best_mse) {
      best_mse = mse;
      best = i;
    }
  }
  if (!std::isfinite(best_mse))
    throw std::runtime_error("optimize_family: objective non-finite over the whole bracket");

  // Golden-section refinement inside the bracketing grid cells.
  double a = params[std::max(best - 1, 0)];
  double b = params[std::min(best + 1, grid - 1)];
  double best_param = params[best];
  if (b > a) {
    constexpr double invphi = 0.6180339887498948482;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = evaluate(x1);
    double f2 = evaluate(x2);
    while ((b - a) > search.rel_tol * best_param) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = evaluate(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = evaluate(x2);
      }
    }
    const double mid = 0.5 * (a + b);
    const double fm = evaluate(mid);
    if (fm < best_mse) {
      best_mse = fm;
      best_param = mid;
    }
    if (f1 < best_mse) {
      best_mse = f1;
      best_param = x1;
    }
    if (f2 < best_mse) {
      best_mse = f2;
      best_param = x2;
    }
  }

  result.param = best_param;
  result.predicted_mse = best_mse;
  result.quantizer = make_family_quantizer(family, k_or_n, best_param);
  return result;
}

}  // namespace qgamp
