#pragma once

#include <vector>

#include "qgamp/quantizer.hpp"

namespace qgamp {

/// Floor applied to measurement-side precisions; shared with the GAMP loop.
inline constexpr double kTauMin = 1e-12;
/// Cells with less conditional mass than this are treated as degenerate.
inline constexpr double kMassFloor = 1e-300;

/// i.i.d. scalar prior: Gaussian or Gauss-Bernoulli (zero with probability
/// 1-rho, N(0, on_variance) otherwise).
class Prior {
 public:
  static Prior gaussian(double mean, double variance);
  static Prior gauss_bernoulli(double rho, double on_variance);

  bool is_gaussian() const { return gaussian_; }
  double mean() const;       // x_init
  double variance() const;   // tau_init

  double gauss_mean() const { return mean_; }
  double gauss_variance() const { return variance_; }
  double rho() const { return rho_; }
  double on_variance() const { return on_variance_; }

  struct Denoised {
    double mean;      // F_in(q, nu)
    double variance;  // E_in(q, nu)
  };
  /// Posterior mean/variance of x given q = x + v, v ~ N(0, nu).
  Denoised denoise(double q, double nu) const;

 private:
  Prior() = default;
  bool gaussian_ = true;
  double mean_ = 0.0;
  double variance_ = 1.0;
  double rho_ = 1.0;
  double on_variance_ = 1.0;
};

struct GaussianMoments {
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  bool degenerate = false;  // set when mass fell below kMassFloor
};

/// Mass and conditional mean/variance of t ~ N(mean, variance) restricted
/// to `cells`. Per-interval moments use erf-family closed forms arranged to
/// stay accurate for cells far in the tail; narrow cells switch to a tilted
/// fixed-order quadrature that has no cancellation. Intervals combine by the
/// law of total mean/variance.
GaussianMoments trunc_gauss_moments(const CellSet& cells, double mean, double variance);

/// Quantizer followed by optional pre-quantization Gaussian noise (s = z + w,
/// w ~ N(0, noise_variance), y = Q(s)). Holds the per-label inverse images,
/// materialized once; `context` supplies the truncation window for modulo
/// quantizers and is otherwise ignored.
class OutputChannel {
 public:
  OutputChannel(ScalarQuantizer quantizer, double noise_variance, GaussianSource context);

  const ScalarQuantizer& quantizer() const { return quantizer_; }
  double noise_variance() const { return sigma2_; }
  int num_labels() const { return static_cast<int>(cells_.size()); }
  const CellSet& cells(int label) const;

  struct OutMoments {
    double mean;      // F_out
    double variance;  // E_out
    bool degenerate;
  };
  /// Conditional mean/variance of z ~ N(z_hat, nu) given the observed label;
  /// with noise the conditioning runs through s ~ N(z_hat, nu + sigma2) and
  /// maps back to z. Degenerate cells fall back to the nearest cell edge
  /// with variance kTauMin * nu.
  OutMoments output_moments(int label, double z_hat, double nu) const;

  struct D12 {
    double u;    // D1
    double tau;  // D2, clamped to [kTauMin, 1/nu_total]
    bool degenerate;
  };
  /// Measurement updates of the quantizer channel. `nu_total` is the full
  /// conditioning variance of s including the channel noise.
  D12 d1_d2(int label, double z_hat, double nu_total) const;

  /// D2 without the clamp; the state-evolution average wants the raw value.
  double d2_raw(int label, double z_hat, double nu_total) const;

  /// p(y | z); for sigma2 = 0 this is the indicator of z in cells(y).
  double likelihood(int label, double z) const;

 private:
  ScalarQuantizer quantizer_;
  double sigma2_;
  std::vector<CellSet> cells_;
};

}  // namespace qgamp
