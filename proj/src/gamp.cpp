#include "qgamp/gamp.hpp"

#include <cmath>
#include <limits>

#include "qgamp/parallel.hpp"

namespace qgamp {

namespace {

void check_dims(const GampState& state, const Eigen::MatrixXd& A, const std::vector<int>& y) {
  const auto m = A.rows();
  const auto n = A.cols();
  if (state.x_hat.size() != n || state.tau_hat.size() != n || state.u.size() != m ||
      state.tau.size() != m || static_cast<Eigen::Index>(y.size()) != m)
    throw std::invalid_argument("gamp: inconsistent dimensions");
}

void blend(Eigen::VectorXd& next, const Eigen::VectorXd& prev, double damping) {
  if (damping < 1.0) next = damping * next + (1.0 - damping) * prev;
}

}  // namespace

GampState gamp_init(const Prior& prior, int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("gamp_init: need n, m >= 1");
  GampState s;
  s.x_hat = Eigen::VectorXd::Constant(n, prior.mean());
  s.tau_hat = Eigen::VectorXd::Constant(n, prior.variance());
  s.u = Eigen::VectorXd::Zero(m);
  s.tau = Eigen::VectorXd::Zero(m);
  s.iter = 0;
  return s;
}

void gamp_step(GampState& state, const Eigen::MatrixXd& A, const Eigen::MatrixXd& A2,
               const std::vector<int>& y, const OutputChannel& channel, const Prior& prior,
               const GampConfig& cfg, StepCounters* counters) {
  check_dims(state, A, y);
  const auto m = A.rows();
  const auto n = A.cols();
  const double sigma2 = channel.noise_variance();

  // Measurement side: z_plug = A x_hat - u .* (A2 tau_hat).
  Eigen::VectorXd nu_z = A2 * state.tau_hat;
  Eigen::VectorXd z_plug = A * state.x_hat - state.u.cwiseProduct(nu_z);
  if (counters) counters->matvecs += 2;

  // Parallel sweeps only pay off once the per-sweep work is substantial;
  // non-regular cells make each channel call several times more expensive.
  const bool heavy_cells = channel.quantizer().kind() != ScalarQuantizer::Kind::Regular;
  const bool par_meas = cfg.parallel && m * (heavy_cells ? 8 : 1) >= 8192;
  const bool par_var = cfg.parallel && n >= 8192;

  Eigen::VectorXd u_new(m), tau_new(m);
  par::for_range(
      m,
      [&](std::int64_t i) {
        const auto d = channel.d1_d2(y[i], z_plug[i], nu_z[i] + sigma2);
        u_new[i] = d.u;
        tau_new[i] = d.tau;
      },
      par_meas);
  if (counters) counters->channel_calls += m;
  blend(u_new, state.u, cfg.damping);
  blend(tau_new, state.tau, cfg.damping);
  if (!u_new.allFinite() || !tau_new.allFinite()) throw DivergenceError(state.iter);

  // Variable side: pseudo-data q = x_hat + (A^T u) ./ (A2^T tau).
  Eigen::VectorXd denom = A2.transpose() * tau_new;
  Eigen::VectorXd corr = A.transpose() * u_new;
  if (counters) counters->matvecs += 2;
  denom = denom.cwiseMax(cfg.tau_min);

  Eigen::VectorXd x_new(n), tau_hat_new(n);
  par::for_range(
      n,
      [&](std::int64_t j) {
        const double q = state.x_hat[j] + corr[j] / denom[j];
        const double nu = 1.0 / denom[j];
        const auto d = prior.denoise(q, nu);
        x_new[j] = d.mean;
        tau_hat_new[j] = d.variance;
      },
      par_var);
  if (counters) counters->denoise_calls += n;
  blend(x_new, state.x_hat, cfg.damping);
  blend(tau_hat_new, state.tau_hat, cfg.damping);
  if (!x_new.allFinite() || !tau_hat_new.allFinite()) throw DivergenceError(state.iter);

  state.u = std::move(u_new);
  state.tau = std::move(tau_new);
  state.x_hat = std::move(x_new);
  state.tau_hat = std::move(tau_hat_new);
  ++state.iter;
}

GampResult gamp_run(const Eigen::MatrixXd& A, const std::vector<int>& y,
                    const OutputChannel& channel, const Prior& prior, const GampConfig& cfg,
                    const Eigen::VectorXd* x_true) {
  const auto n = A.cols();
  GampState state = gamp_init(prior, static_cast<int>(n), static_cast<int>(A.rows()));
  const Eigen::MatrixXd A2 = A.cwiseAbs2();  // cached once, reused every sweep

  GampResult result;
  result.history.reserve(cfg.max_iters);
  auto record = [&](const GampState& s) {
    double mse = std::numeric_limits<double>::quiet_NaN();
    if (x_true) mse = (s.x_hat - *x_true).squaredNorm() / static_cast<double>(n);
    result.history.push_back({s.iter, s.tau_hat.mean(), mse});
    if (cfg.record_snapshots) result.snapshots.push_back(s.x_hat);
  };

  for (int t = 0; t < cfg.max_iters; ++t) {
    const Eigen::VectorXd x_prev = state.x_hat;
    try {
      gamp_step(state, A, A2, y, channel, prior, cfg);
    } catch (const DivergenceError& e) {
      result.diverged = true;
      result.diverged_iter = e.iteration;
      break;
    }
    record(state);
    const double scale = std::max(x_prev.norm(), state.x_hat.norm());
    const double change = (state.x_hat - x_prev).norm();
    if (change <= cfg.stop_tol * std::max(scale, 1e-300)) {
      result.converged = true;
      break;
    }
  }
  result.x_hat = state.x_hat;
  result.iters = state.iter;
  return result;
}

namespace reference {

void gamp_step_serial(GampState& state, const Eigen::MatrixXd& A, const Eigen::MatrixXd& A2,
                      const std::vector<int>& y, const OutputChannel& channel, const Prior& prior,
                      const GampConfig& cfg) {
  check_dims(state, A, y);
  const auto m = A.rows();
  const auto n = A.cols();
  const double sigma2 = channel.noise_variance();

  Eigen::VectorXd u_new(m), tau_new(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double nu_z = 0.0, az = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      nu_z += A2(i, j) * state.tau_hat[j];
      az += A(i, j) * state.x_hat[j];
    }
    const double z_plug = az - state.u[i] * nu_z;
    const auto d = channel.d1_d2(y[i], z_plug, nu_z + sigma2);
    u_new[i] = cfg.damping * d.u + (1.0 - cfg.damping) * state.u[i];
    tau_new[i] = cfg.damping * d.tau + (1.0 - cfg.damping) * state.tau[i];
    if (!std::isfinite(u_new[i]) || !std::isfinite(tau_new[i])) throw DivergenceError(state.iter);
  }

  Eigen::VectorXd x_new(n), tau_hat_new(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double denom = 0.0, corr = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      denom += A2(i, j) * tau_new[i];
      corr += A(i, j) * u_new[i];
    }
    denom = std::max(denom, cfg.tau_min);
    const auto d = prior.denoise(state.x_hat[j] + corr / denom, 1.0 / denom);
    x_new[j] = cfg.damping * d.mean + (1.0 - cfg.damping) * state.x_hat[j];
    tau_hat_new[j] = cfg.damping * d.variance + (1.0 - cfg.damping) * state.tau_hat[j];
    if (!std::isfinite(x_new[j]) || !std::isfinite(tau_hat_new[j]))
      throw DivergenceError(state.iter);
  }

  state.u = std::move(u_new);
  state.tau = std::move(tau_new);
  state.x_hat = std::move(x_new);
  state.tau_hat = std::move(tau_hat_new);
  ++state.iter;
}

}  // namespace reference

}  // namespace qgamp
