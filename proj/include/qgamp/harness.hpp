#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "qgamp/gamp.hpp"

namespace qgamp {

/// Raised when the grid oracle finds zero posterior mass (labels
/// inconsistent with every grid point under a noiseless channel).
struct OracleInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Estimator { Gamp, Lmmse, Oracle };
std::string estimator_name(Estimator e);

/// How the quantizer is built for each (m, trial) pair.
struct QuantizerRecipe {
  enum class Mode {
    Fixed,         // one explicit quantizer for the whole sweep
    UniformSigma,  // K uniform levels, loading = loading_sigmas * stddev(z)
    AdaptiveLinf,  // K uniform levels, granular region [-|Ax|_inf, |Ax|_inf]
  };
  Mode mode = Mode::UniformSigma;
  ScalarQuantizer fixed = ScalarQuantizer::regular({});
  int levels_count = 16;
  double loading_sigmas = 3.0;
};

struct ExperimentSpec {
  int n = 100;
  std::vector<double> m_over_n;
  Prior prior = Prior::gaussian(0.0, 1.0);
  QuantizerRecipe recipe;
  double sigma2 = 0.0;
  int trials = 1;
  std::uint64_t seed = 1;
  std::vector<Estimator> estimators{Estimator::Gamp};
  GampConfig gamp;
  int oracle_points_per_axis = 801;
  bool parallel_trials = true;
};

/// Largest m*n the runner will allocate.
inline constexpr std::int64_t kMaxMatrixEntries = 1LL << 24;

ExperimentSpec parse_experiment_spec(const std::string& text);

class KvBlock;
/// `prior.kind`, `prior.mean`, `prior.variance`, `prior.rho`, `prior.on_variance`.
Prior parse_prior_block(const KvBlock& kv);
/// `quantizer.kind` plus the fields of the quantizer text form.
ScalarQuantizer parse_quantizer_block(const KvBlock& kv);

struct Instance {
  Eigen::VectorXd x;
  Eigen::MatrixXd A;
  Eigen::VectorXd w;
  std::vector<int> y;
  ScalarQuantizer quantizer = ScalarQuantizer::regular({});
};

/// x ~ prior, A_ij ~ N(0, 1/m), w ~ N(0, sigma2), y = Q(Ax + w), all drawn
/// from the substream (seed, m, trial).
Instance generate_instance(const ExperimentSpec& spec, int m, int trial);

/// Second moment of a single measurement z_i = (Ax)_i under the spec.
double measurement_second_moment(const ExperimentSpec& spec, int m);

/// Linear MMSE estimate treating decoded levels as z plus white noise whose
/// variance is the quantizer's input distortion (plus channel noise).
Eigen::VectorXd lmmse_estimate(const Eigen::MatrixXd& A, const Eigen::VectorXd& y_levels,
                               const ScalarQuantizer& quantizer, const Prior& prior,
                               double sigma2, const GaussianSource& input_dist);

struct OracleGrid {
  double half_width_sigmas = 6.0;
  int points_per_axis = 481;
};

/// Brute-force posterior mean on a tensor grid; n <= 3 only.
Eigen::VectorXd grid_posterior_oracle(const Eigen::MatrixXd& A, const std::vector<int>& y,
                                      const Prior& prior, const OutputChannel& channel,
                                      const OracleGrid& grid);

struct TrialRecord {
  double m_over_n = 0.0;
  int m = 0;
  Estimator estimator = Estimator::Gamp;
  int trial = 0;
  double sq_err = 0.0;  // ||x - x_hat||^2 / n
  int iters = 0;
  int flag = 0;  // 0 ok, 1 diverged, 2 infeasible
  double wall_time = 0.0;
};

struct MedianRow {
  double m_over_n;
  Estimator estimator;
  double median_sq_err;
  double median_iters;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  /// Header `m_over_n,estimator,trial,sq_err,sq_err_db,iters,flag`.
  std::string csv() const;
  std::vector<MedianRow> medians() const;
  std::string median_table() const;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

double to_db(double mse);

}  // namespace qgamp
