#pragma once

#include <vector>

#include "qgamp/channels.hpp"

namespace qgamp {

struct SeProblem {
  double beta;       // measurement ratio n/m
  double sigma2;     // pre-quantization noise variance
  Prior prior;
  ScalarQuantizer quantizer;
};

struct SeConfig {
  int quad_nodes = 61;     // Gauss-Hermite points per dimension
  int max_iters = 200;
  double fp_tol = 1e-10;   // relative to the prior variance
  double nu_floor = 1e-12;
  bool parallel = true;
};

struct SeTrajectory {
  std::vector<double> taus;  // tau_0 = prior variance, then the recursion
  bool converged = false;
  double fixed_point = 0.0;
  bool nu_clamped = false;   // set if nu ever exceeded beta * tau_0
};

/// Mean of the prior denoiser variance over q = x + v, v ~ N(0, nu).
/// Closed form for the Gaussian prior, two-branch Gauss-Hermite for
/// Gauss-Bernoulli.
double ein_bar(double nu, const Prior& prior, const SeConfig& cfg);

/// E[D2(y, z_hat, nu + sigma2)] with z_hat ~ N(0, beta tau_0 - nu) and
/// z = z_hat + e, e ~ N(0, nu). The inner average over y is the exact
/// label-mass sum, so only the z_hat dimension is quadratured.
double d2_bar(double nu, const SeProblem& prob, const SeConfig& cfg);

/// The scalar MSE recursion; taus are per-component asymptotic MSEs.
SeTrajectory se_run(const SeProblem& prob, const SeConfig& cfg);

namespace reference {
/// Serial counterpart of the d2_bar kernel, used by tests and the benchmark.
double d2_bar_serial(double nu, const SeProblem& prob, const SeConfig& cfg);
}  // namespace reference

}  // namespace qgamp
