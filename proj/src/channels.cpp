#include "qgamp/channels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qgamp/quadrature.hpp"
#include "qgamp/special.hpp"

namespace qgamp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Standardized distance past which an interval's mass is below kMassFloor.
constexpr double kFarCut = 37.5;

using detail::std_normal_pdf;
using detail::upper_tail;

struct IntervalMoments {
  double mass;
  double mean;  // standardized
  double var;   // standardized
};

// Tilted Gauss-Legendre about the interval midpoint: the conditional density
// of t = xi - c on [-h, h] is proportional to exp(-c t - t^2/2). All summands
// are positive, so narrow far-tail cells come out at full precision where the
// erf-difference forms would cancel catastrophically.
IntervalMoments tilted_gl_moments(double c, double h) {
  static const QuadratureRule gl = gauss_legendre(32);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < gl.size(); ++i) {
    const double t = h * gl.nodes[i];
    const double g = h * gl.weights[i] * std::exp(-c * t - 0.5 * t * t);
    m0 += g;
    m1 += g * t;
    m2 += g * t * t;
  }
  const double mass = std_normal_pdf(c) * m0;
  const double off = m1 / m0;
  const double var = std::max(m2 / m0 - off * off, 0.0);
  return {mass, c + off, var};
}

IntervalMoments right_tail_moments(double alpha) {
  if (alpha >= kFarCut) return {0.0, alpha, 0.0};
  const double mass = upper_tail(alpha);
  const double m = std_normal_pdf(alpha) / mass;
  double var;
  if (alpha >= 1.0) {
    // 1 + alpha m - m^2 rearranged through r = m - alpha; the direct form
    // loses ~alpha^2 digits once the tail is a few sigma out.
    const double r = m - alpha;
    var = (1.0 - alpha * r) - r * r;
  } else {
    var = 1.0 + alpha * m - m * m;
  }
  return {mass, m, std::max(var, 0.0)};
}

IntervalMoments bounded_moments(double alpha, double beta) {
  // Precondition: alpha + beta >= 0 (caller reflects), alpha < beta.
  if (alpha >= kFarCut) return {0.0, alpha, 0.0};
  if (beta > kFarCut) return right_tail_moments(alpha);
  const double c = 0.5 * (alpha + beta);
  const double h = 0.5 * (beta - alpha);
  if (h <= 1.0 && c * h <= 8.0) return tilted_gl_moments(c, h);

  double mass;
  if (alpha < 0.0) {
    mass = 0.5 * (std::erf(beta / detail::kSqrt2) - std::erf(alpha / detail::kSqrt2));
  } else {
    // The tail ratio here is at most e^{-2}, so the subtraction is benign.
    mass = upper_tail(alpha) - upper_tail(beta);
  }
  if (mass < kMassFloor) return {0.0, c, 0.0};
  const double pa = std_normal_pdf(alpha);
  const double pb = std_normal_pdf(beta);
  const double m = (pa - pb) / mass;
  const double a = (alpha * pa - beta * pb) / mass;
  const double var = std::max(1.0 + a - m * m, 0.0);
  return {mass, m, var};
}

IntervalMoments std_interval_moments(double alpha, double beta) {
  if (alpha == -kInf && beta == kInf) return {1.0, 0.0, 1.0};
  if (beta == kInf) return right_tail_moments(alpha);
  if (alpha == -kInf) {
    const auto m = right_tail_moments(-beta);
    return {m.mass, -m.mean, m.var};
  }
  if (alpha + beta < 0.0) {
    const auto m = bounded_moments(-beta, -alpha);
    return {m.mass, -m.mean, m.var};
  }
  return bounded_moments(alpha, beta);
}

double nearest_finite_edge(const CellSet& cells, double x) {
  double best = 0.0;
  double best_dist = kInf;
  for (const auto& iv : cells.intervals()) {
    for (double e : {iv.lo, iv.hi}) {
      if (!std::isfinite(e)) continue;
      const double d = std::abs(e - x);
      if (d < best_dist) {
        best_dist = d;
        best = e;
      }
    }
  }
  return std::isfinite(best_dist) ? best : x;
}

}  // namespace

GaussianMoments trunc_gauss_moments(const CellSet& cells, double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(mean) || !std::isfinite(variance))
    throw std::invalid_argument("trunc_gauss_moments: need finite mean and variance > 0");
  if (cells.covers_everything()) return {1.0, mean, variance, false};

  const double sd = std::sqrt(variance);
  const std::size_t k = cells.intervals().size();
  std::vector<IntervalMoments> parts;
  parts.reserve(k);
  double total = 0.0;
  for (const auto& iv : cells.intervals()) {
    const double alpha = (iv.lo == -kInf) ? -kInf : (iv.lo - mean) / sd;
    const double beta = (iv.hi == kInf) ? kInf : (iv.hi - mean) / sd;
    const auto m = std_interval_moments(alpha, beta);
    parts.push_back(m);
    total += m.mass;
  }
  if (!(total >= kMassFloor)) {
    return {total, nearest_finite_edge(cells, mean), 0.0, true};
  }
  double mean_std = 0.0;
  for (const auto& p : parts) mean_std += p.mass * p.mean;
  mean_std /= total;
  // Parallel-axis combination: every term is nonnegative, so widely
  // separated intervals (binned cells) do not cancel.
  double var_std = 0.0;
  for (const auto& p : parts) {
    const double d = p.mean - mean_std;
    var_std += p.mass * (p.var + d * d);
  }
  var_std /= total;
  return {total, mean + sd * mean_std, variance * var_std, false};
}

Prior Prior::gaussian(double mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("prior: variance must be > 0");
  Prior p;
  p.gaussian_ = true;
  p.mean_ = mean;
  p.variance_ = variance;
  return p;
}

Prior Prior::gauss_bernoulli(double rho, double on_variance) {
  if (!(rho > 0.0) || rho > 1.0) throw std::invalid_argument("prior: rho must be in (0,1]");
  if (!(on_variance > 0.0)) throw std::invalid_argument("prior: on_variance must be > 0");
  Prior p;
  p.gaussian_ = false;
  p.rho_ = rho;
  p.on_variance_ = on_variance;
  return p;
}

double Prior::mean() const { return gaussian_ ? mean_ : 0.0; }

double Prior::variance() const { return gaussian_ ? variance_ : rho_ * on_variance_; }

Prior::Denoised Prior::denoise(double q, double nu) const {
  if (!(nu > 0.0) || !std::isfinite(q))
    throw std::invalid_argument("denoise: need finite q and nu > 0");
  if (gaussian_) {
    const double k = variance_ / (variance_ + nu);
    return {mean_ + k * (q - mean_), variance_ * nu / (variance_ + nu)};
  }
  // Two-component mixture posterior; responsibilities in the log domain so
  // tiny rho with large |q| cannot overflow the ratio.
  const double von = on_variance_;
  const double l_on = std::log(rho_) - 0.5 * std::log(von + nu) - 0.5 * q * q / (von + nu);
  const double l_off = std::log1p(-rho_) - 0.5 * std::log(nu) - 0.5 * q * q / nu;
  const double pi_on = 1.0 / (1.0 + std::exp(l_off - l_on));
  const double m_on = von * q / (von + nu);
  const double v_on = von * nu / (von + nu);
  const double mean = pi_on * m_on;
  const double var = pi_on * (v_on + m_on * m_on) - mean * mean;
  return {mean, std::max(var, 0.0)};
}

OutputChannel::OutputChannel(ScalarQuantizer quantizer, double noise_variance,
                             GaussianSource context)
    : quantizer_(std::move(quantizer)), sigma2_(noise_variance) {
  if (!(sigma2_ >= 0.0)) throw std::invalid_argument("channel: noise variance must be >= 0");
  const int labels = quantizer_.num_labels();
  cells_.reserve(labels);
  for (int y = 1; y <= labels; ++y) cells_.push_back(quantizer_.cell_set(y, context));
}

const CellSet& OutputChannel::cells(int label) const {
  if (label < 1 || label > num_labels()) throw std::invalid_argument("channel: label out of range");
  return cells_[label - 1];
}

OutputChannel::OutMoments OutputChannel::output_moments(int label, double z_hat, double nu) const {
  if (!(nu > 0.0)) throw std::invalid_argument("output_moments: need nu > 0");
  const double nu_s = nu + sigma2_;
  const auto sm = trunc_gauss_moments(cells(label), z_hat, nu_s);
  if (sm.degenerate) return {sm.mean, kTauMin * nu, true};
  const double k = nu / nu_s;
  return {z_hat + k * (sm.mean - z_hat), k * k * sm.variance + nu * (1.0 - k), false};
}

OutputChannel::D12 OutputChannel::d1_d2(int label, double z_hat, double nu_total) const {
  if (!(nu_total > 0.0)) throw std::invalid_argument("d1_d2: need nu > 0");
  const auto sm = trunc_gauss_moments(cells(label), z_hat, nu_total);
  double u, tau;
  if (sm.degenerate) {
    u = (sm.mean - z_hat) / nu_total;
    tau = (1.0 - kTauMin) / nu_total;
  } else {
    u = (sm.mean - z_hat) / nu_total;
    tau = (1.0 - sm.variance / nu_total) / nu_total;
  }
  tau = std::clamp(tau, kTauMin, 1.0 / nu_total);
  return {u, tau, sm.degenerate};
}

double OutputChannel::d2_raw(int label, double z_hat, double nu_total) const {
  if (!(nu_total > 0.0)) throw std::invalid_argument("d2_raw: need nu > 0");
  const auto sm = trunc_gauss_moments(cells(label), z_hat, nu_total);
  if (sm.degenerate) return (1.0 - kTauMin) / nu_total;
  return (1.0 - sm.variance / nu_total) / nu_total;
}

double OutputChannel::likelihood(int label, double z) const {
  if (!std::isfinite(z)) throw std::invalid_argument("likelihood: z must be finite");
  const CellSet& cs = cells(label);
  if (sigma2_ == 0.0) return cs.contains(z) ? 1.0 : 0.0;
  const auto m = trunc_gauss_moments(cs, z, sigma2_);
  return m.degenerate ? 0.0 : m.mass;
}

}  // namespace qgamp
