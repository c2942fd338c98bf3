#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgamp/channels.hpp"

namespace qgamp {

struct GampConfig {
  int max_iters = 25;
  double stop_tol = 1e-8;   // relative change of x_hat
  double damping = 1.0;     // 1 = plain updates
  double tau_min = kTauMin;
  bool parallel = true;     // OpenMP sweeps; false runs the same code serially
  bool record_snapshots = false;
};

struct GampState {
  Eigen::VectorXd x_hat;    // length n
  Eigen::VectorXd tau_hat;  // length n, > 0
  Eigen::VectorXd u;        // length m
  Eigen::VectorXd tau;      // length m, >= tau_min
  int iter = 0;
};

struct DivergenceError : std::runtime_error {
  explicit DivergenceError(int iteration)
      : std::runtime_error("gamp diverged at iteration " + std::to_string(iteration)),
        iteration(iteration) {}
  int iteration;
};

/// Counts the super-linear work per sweep; tests pin the per-iteration cost
/// to four matrix-vector products plus one channel call per measurement and
/// one denoiser call per variable.
struct StepCounters {
  long matvecs = 0;
  long channel_calls = 0;
  long denoise_calls = 0;
};

struct GampHistoryRow {
  int iter;
  double mean_tau_hat;
  double mse;  // ||x - x_hat||^2 / n when the truth is supplied, else NaN
};

struct GampResult {
  Eigen::VectorXd x_hat;
  int iters = 0;
  bool converged = false;
  bool diverged = false;
  int diverged_iter = -1;
  std::vector<GampHistoryRow> history;
  std::vector<Eigen::VectorXd> snapshots;
};

/// x_hat = prior mean, tau_hat = prior variance, u = 0.
GampState gamp_init(const Prior& prior, int n, int m);

/// One full sweep: measurement-side updates through the quantizer channel,
/// then variable-side denoising. A2 must hold the elementwise square of A.
/// Throws DivergenceError if an update goes non-finite.
void gamp_step(GampState& state, const Eigen::MatrixXd& A, const Eigen::MatrixXd& A2,
               const std::vector<int>& y, const OutputChannel& channel, const Prior& prior,
               const GampConfig& cfg, StepCounters* counters = nullptr);

/// Iterates gamp_step until the relative change of x_hat drops below
/// stop_tol or max_iters is reached. Divergence is reported in the result,
/// not thrown.
GampResult gamp_run(const Eigen::MatrixXd& A, const std::vector<int>& y,
                    const OutputChannel& channel, const Prior& prior, const GampConfig& cfg,
                    const Eigen::VectorXd* x_true = nullptr);

namespace reference {

/// Plain serial implementation with naive loops, kept as the reference the
/// OpenMP path is tested and benchmarked against.
void gamp_step_serial(GampState& state, const Eigen::MatrixXd& A, const Eigen::MatrixXd& A2,
                      const std::vector<int>& y, const OutputChannel& channel, const Prior& prior,
                      const GampConfig& cfg);

}  // namespace reference

}  // namespace qgamp
