#pragma once

#include <utility>
#include <vector>

#include "qgamp/state_evolution.hpp"

namespace qgamp {

struct LloydResult {
  ScalarQuantizer quantizer = ScalarQuantizer::regular({});
  bool converged = false;
  int iters = 0;
};

/// K evenly spaced levels over mean +/- 3 stddev.
std::vector<double> lloyd_default_init(int levels_count, const GaussianSource& src);

/// Classic Lloyd iteration for a regular quantizer: centroids via truncated
/// Gaussian means, thresholds at level midpoints, until the largest level
/// movement drops below tol.
LloydResult lloyd(int levels_count, const GaussianSource& src, std::vector<double> init_levels,
                  double tol = 1e-9, int max_iters = 500);
LloydResult lloyd(int levels_count, const GaussianSource& src, double tol = 1e-9,
                  int max_iters = 500);

/// Reconstruction-MSE objective: a candidate quantizer is scored by the
/// state-evolution MSE after se_config.max_iters steps. The default budget
/// matches the reconstruction iteration budget; scoring the infinite-t
/// fixed point instead favors binned designs whose waterfall is too slow
/// to traverse at practical sizes.
inline SeConfig design_se_config() {
  SeConfig cfg;
  cfg.max_iters = 25;
  return cfg;
}

struct DesignObjective {
  double beta = 1.0;
  double sigma2 = 0.0;
  Prior prior = Prior::gaussian(0.0, 1.0);
  SeConfig se_config = design_se_config();
};

enum class FamilyKind {
  Regular,  // uniform with loading half-width L, scored over L
  Modulo,   // uniform modulo with step delta, scored over delta
};

struct SearchSpec {
  double lo;              // positive bracket for the scalar parameter
  double hi;
  int grid_points = 25;   // log-spaced coarse stage
  double rel_tol = 1e-4;  // golden-section refinement target
};

struct DesignResult {
  ScalarQuantizer quantizer = ScalarQuantizer::regular({});
  double param = 0.0;          // winning L or delta
  double predicted_mse = 0.0;  // SE fixed point at the winner
  std::vector<std::pair<double, double>> probes;  // every (param, mse) evaluated
};

/// Minimizes the SE fixed point over the family's scalar parameter:
/// log-spaced grid, then golden-section refinement around the best cell.
DesignResult optimize_family(FamilyKind family, int k_or_n, const DesignObjective& objective,
                             const SearchSpec& search);

/// Builds the family member for a given parameter value.
ScalarQuantizer make_family_quantizer(FamilyKind family, int k_or_n, double param);

}  // namespace qgamp
