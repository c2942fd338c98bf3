#include "qgamp/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "qgamp/parallel.hpp"
#include "qgamp/quadrature.hpp"
#include "qgamp/special.hpp"

namespace qgamp {

namespace {

// The scalar expectations here have boundary layers (denoiser responsibility
// transitions, quantizer cell edges) that plain Gauss-Hermite resolves too
// slowly, so expectations run on a panelized Gauss-Legendre grid over the
// standardized axis with extra panels packed around the known breakpoints.

constexpr double kPanelRange = 12.0;     // standardized half-range; tail mass ~ 5e-32
constexpr double kPanelBaseWidth = 0.5;
constexpr double kCullSigmas = 9.0;      // labels farther than this contribute < 1e-19

struct Breakpoint {
  double t;       // standardized location
  double width;   // standardized layer scale
};

std::vector<double> build_edges(const std::vector<Breakpoint>& breakpoints) {
  std::set<double> edges;
  const int base = static_cast<int>(2.0 * kPanelRange / kPanelBaseWidth);
  for (int i = 0; i <= base; ++i) edges.insert(-kPanelRange + i * kPanelBaseWidth);
  constexpr double offsets[] = {-6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0};
  for (const auto& bp : breakpoints) {
    if (!(bp.width > 0.0) || bp.width >= 0.5 * kPanelBaseWidth) continue;
    for (double off : offsets) {
      const double e = bp.t + off * bp.width;
      if (e > -kPanelRange && e < kPanelRange) edges.insert(e);
    }
  }
  std::vector<double> out(edges.begin(), edges.end());
  // Drop nearly coincident edges left by overlapping refinement clusters.
  std::vector<double> cleaned;
  cleaned.reserve(out.size());
  for (double e : out) {
    if (cleaned.empty() || e - cleaned.back() > 1e-12) cleaned.push_back(e);
  }
  return cleaned;
}

int panel_nodes(const SeConfig& cfg) { return std::clamp(cfg.quad_nodes / 4, 6, 64); }

/// E[g(T)] for T ~ N(0,1) restricted to the panel grid.
template <class F>
double panel_expect(const F& g, const std::vector<double>& edges, int nodes_per_panel,
                    bool parallel) {
  const QuadratureRule gl = gauss_legendre(nodes_per_panel);
  const std::int64_t panels = static_cast<std::int64_t>(edges.size()) - 1;
  std::vector<double> partial(panels);
  par::for_range_dynamic(
      panels,
      [&](std::int64_t p) {
        const double a = edges[p], b = edges[p + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double acc = 0.0;
        for (int i = 0; i < gl.size(); ++i) {
          const double t = mid + half * gl.nodes[i];
          acc += gl.weights[i] * g(t) * detail::std_normal_pdf(t);
        }
        partial[p] = half * acc;
      },
      parallel);
  double total = 0.0;
  for (double p : partial) total += p;  // fixed order: thread-count independent
  return total;
}

double ein_gauss_bernoulli(double nu, const Prior& prior, const SeConfig& cfg) {
  const double rho = prior.rho();
  const double von = prior.on_variance();
  // Responsibility transition |q| = q_star, layer width delta_q.
  const double slope = 1.0 / nu - 1.0 / (von + nu);
  const double rhs = std::log((1.0 - rho) / rho) + 0.5 * std::log((von + nu) / nu);
  double q_star = -1.0, delta_q = 0.0;
  if (rhs > 0.0 && rho < 1.0) {
    q_star = std::sqrt(2.0 * rhs / slope);
    delta_q = 1.0 / (q_star * slope);
  }

  const int k = panel_nodes(cfg);
  double acc = 0.0;
  const double branch_sd[] = {std::sqrt(nu), std::sqrt(von + nu)};
  const double branch_w[] = {1.0 - rho, rho};
  for (int b = 0; b < 2; ++b) {
    if (branch_w[b] == 0.0) continue;
    const double s = branch_sd[b];
    std::vector<Breakpoint> bps;
    if (q_star > 0.0) {
      bps.push_back({q_star / s, delta_q / s});
      bps.push_back({-q_star / s, delta_q / s});
    }
    const auto edges = build_edges(bps);
    acc += branch_w[b] *
           panel_expect([&](double t) { return prior.denoise(s * t, nu).variance; }, edges, k,
                        cfg.parallel);
  }
  return acc;
}

// E over y of D2(y, z_hat, nu_tot) at fixed z_hat: exact label-mass sum.
// Labels whose cells sit farther than kCullSigmas out are skipped.
double d2_label_sum(const OutputChannel& channel, double z_hat, double nu_tot) {
  const double cull = kCullSigmas * std::sqrt(nu_tot);
  double acc = 0.0;
  for (int y = 1; y <= channel.num_labels(); ++y) {
    const CellSet& cs = channel.cells(y);
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& iv : cs.intervals()) {
      if (iv.contains(z_hat)) {
        dist = 0.0;
        break;
      }
      dist = std::min(dist, std::min(std::abs(z_hat - iv.lo), std::abs(z_hat - iv.hi)));
    }
    if (dist > cull) continue;
    const auto m = trunc_gauss_moments(cs, z_hat, nu_tot);
    if (m.degenerate) continue;
    acc += m.mass * (1.0 - m.variance / nu_tot) / nu_tot;
  }
  return acc;
}

struct D2BarResult {
  double value;
  bool clamped;
};

D2BarResult d2_bar_impl(double nu, const OutputChannel& channel, double tau0, double beta,
                        double sigma2, const SeConfig& cfg, bool parallel) {
  bool clamped = false;
  const double cap = beta * tau0;
  if (nu > cap) {
    nu = std::max(cap - cfg.nu_floor, cfg.nu_floor);
    clamped = true;
  }
  nu = std::max(nu, cfg.nu_floor);
  const double nu_tot = nu + sigma2;
  const double var_zhat = std::max(cap - nu, 0.0);

  if (var_zhat <= cfg.nu_floor * cap) {
    // z_hat degenerate at zero: the outer expectation collapses.
    return {d2_label_sum(channel, 0.0, nu_tot), clamped};
  }

  const double sd = std::sqrt(var_zhat);
  // Cell edges are the breakpoints of the label-sum integrand; the layer
  // scale is the conditional spread of z around z_hat.
  std::vector<Breakpoint> bps;
  const double layer = std::sqrt(nu_tot) / sd;
  std::set<double> seen;
  for (int y = 1; y <= channel.num_labels(); ++y) {
    for (const auto& iv : channel.cells(y).intervals()) {
      for (double e : {iv.lo, iv.hi}) {
        if (!std::isfinite(e)) continue;
        const double t = e / sd;
        if (std::abs(t) >= kPanelRange) continue;
        if (seen.insert(t).second) bps.push_back({t, layer});
      }
    }
  }
  const auto edges = build_edges(bps);
  const double value = panel_expect(
      [&](double t) { return d2_label_sum(channel, sd * t, nu_tot); }, edges, panel_nodes(cfg),
      parallel);
  return {value, clamped};
}

OutputChannel make_channel(const SeProblem& prob) {
  const double var_s = prob.beta * prob.prior.variance() + prob.sigma2;
  return OutputChannel(prob.quantizer, prob.sigma2, GaussianSource{0.0, var_s});
}

}  // namespace

double ein_bar(double nu, const Prior& prior, const SeConfig& cfg) {
  if (!(nu > 0.0)) throw std::invalid_argument("ein_bar: need nu > 0");
  if (nu > 1e300) return prior.variance();
  if (prior.is_gaussian()) {
    const double v = prior.gauss_variance();
    return v * nu / (v + nu);
  }
  return ein_gauss_bernoulli(nu, prior, cfg);
}

double d2_bar(double nu, const SeProblem& prob, const SeConfig& cfg) {
  if (!(nu > 0.0)) throw std::invalid_argument("d2_bar: need nu > 0");
  const OutputChannel channel = make_channel(prob);
  return d2_bar_impl(nu, channel, prob.prior.variance(), prob.beta, prob.sigma2, cfg, cfg.parallel)
      .value;
}

SeTrajectory se_run(const SeProblem& prob, const SeConfig& cfg) {
  if (!(prob.beta > 0.0)) throw std::invalid_argument("se_run: need beta > 0");
  const double tau0 = prob.prior.variance();
  const OutputChannel channel = make_channel(prob);

  SeTrajectory traj;
  traj.taus.push_back(tau0);
  for (int t = 0; t < cfg.max_iters; ++t) {
    const double tau_prev = traj.taus.back();
    const auto d2 = d2_bar_impl(prob.beta * tau_prev, channel, tau0, prob.beta, prob.sigma2, cfg,
                                cfg.parallel);
    traj.nu_clamped |= d2.clamped;
    double tau_next;
    if (!std::isfinite(d2.value) || d2.value <= 1e-300) {
      tau_next = tau0;  // uninformative channel: stationary at the prior
    } else {
      tau_next = ein_bar(1.0 / d2.value, prob.prior, cfg);
    }
    traj.taus.push_back(tau_next);
    if (std::abs(tau_next - tau_prev) < cfg.fp_tol * tau0) {
      traj.converged = true;
      break;
    }
  }
  traj.fixed_point = traj.taus.back();
  return traj;
}

namespace reference {

double d2_bar_serial(double nu, const SeProblem& prob, const SeConfig& cfg) {
  if (!(nu > 0.0)) throw std::invalid_argument("d2_bar: need nu > 0");
  const OutputChannel channel = make_channel(prob);
  return d2_bar_impl(nu, channel, prob.prior.variance(), prob.beta, prob.sigma2, cfg, false).value;
}

}  // namespace reference

}  // namespace qgamp
