#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "qgamp/harness.hpp"
#include "qgamp/kvconfig.hpp"
#include "qgamp/rng.hpp"

using namespace qgamp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.n = 16;
  spec.m_over_n = {2.0};
  spec.prior = Prior::gaussian(0.0, 1.0);
  spec.recipe.mode = QuantizerRecipe::Mode::UniformSigma;
  spec.recipe.levels_count = 8;
  spec.trials = 4;
  spec.seed = 321;
  spec.estimators = {Estimator::Gamp, Estimator::Lmmse};
  return spec;
}

}  // namespace

TEST_CASE("instances are reproducible from the substream key") {
  const auto spec = small_spec();
  const auto a = generate_instance(spec, 32, 3);
  const auto b = generate_instance(spec, 32, 3);
  CHECK(a.x == b.x);
  CHECK(a.A == b.A);
  CHECK(a.y == b.y);
  const auto c = generate_instance(spec, 32, 4);
  CHECK(a.x != c.x);
}

TEST_CASE("measurement variance tracks n/m") {
  ExperimentSpec spec = small_spec();
  spec.n = 100;
  double acc = 0.0;
  int count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = generate_instance(spec, 200, trial);
    const VectorXd z = inst.A * inst.x;
    acc += z.squaredNorm();
    count += static_cast<int>(z.size());
  }
  CHECK(acc / count == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("gauss-bernoulli support size concentrates at rho n") {
  ExperimentSpec spec = small_spec();
  spec.n = 1024;
  spec.prior = Prior::gauss_bernoulli(1.0 / 32.0, 32.0);
  double mean_support = 0.0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    const auto inst = generate_instance(spec, 512, trial);
    mean_support += (inst.x.array() != 0.0).count();
  }
  mean_support /= trials;
  CHECK(mean_support == doctest::Approx(32.0).epsilon(0.15));
}

TEST_CASE("lmmse recovers exactly when distortion vanishes and m >= n") {
  const int n = 40, m = 60;
  Rng rng(5);
  MatrixXd a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal() / std::sqrt(m);
  VectorXd x(n);
  for (int j = 0; j < n; ++j) x[j] = rng.normal();
  const VectorXd z = a * x;
  // Quantizer so fine its distortion is ~1e-9; pass the exact z as levels.
  const auto q = ScalarQuantizer::uniform_regular(1 << 16, 10.0);
  const auto x_hat = lmmse_estimate(a, z, q, Prior::gaussian(0.0, 1.0), 0.0, {0.0, 2.0 / 3.0});
  CHECK((x_hat - x).norm() / x.norm() < 1e-3);
}

TEST_CASE("lmmse equals the scalar wiener filter for identity mixing") {
  const int n = 12;
  const MatrixXd a = MatrixXd::Identity(n, n);
  const auto q = ScalarQuantizer::uniform_regular(16, 3.0);
  Rng rng(6);
  VectorXd x(n), levels(n);
  for (int j = 0; j < n; ++j) x[j] = rng.normal();
  for (int j = 0; j < n; ++j) levels[j] = q.decode(q.encode(x[j]));
  const GaussianSource dist{0.0, 1.0};
  const double sd2 = q.measurement_distortion(dist);
  const auto x_hat = lmmse_estimate(a, levels, q, Prior::gaussian(0.0, 1.0), 0.0, dist);
  for (int j = 0; j < n; ++j)
    CHECK(x_hat[j] == doctest::Approx(levels[j] / (1.0 + sd2)).epsilon(1e-8));
}

TEST_CASE("lmmse mse on a uniform tight frame tracks n sigma_d^2 / m") {
  const int n = 32, m = 64;
  Rng rng(7);
  const double sigma_z2 = static_cast<double>(n) / m;
  // Wide loading: overload events would otherwise dominate the average.
  const auto q = ScalarQuantizer::uniform_regular(4096, 6.5 * std::sqrt(sigma_z2));
  const GaussianSource dist{0.0, sigma_z2};
  const double sd2 = q.measurement_distortion(dist);

  double mse = 0.0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    MatrixXd g(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    const MatrixXd thin_q = Eigen::HouseholderQR<MatrixXd>(g).householderQ() *
                            MatrixXd::Identity(m, n);
    const MatrixXd a = std::sqrt(static_cast<double>(m) / n) * thin_q;  // A^T A = (m/n) I
    VectorXd x(n);
    for (int j = 0; j < n; ++j) x[j] = rng.normal();
    const VectorXd z = a * x;
    VectorXd levels(m);
    for (int i = 0; i < m; ++i) levels[i] = q.decode(q.encode(z[i]));
    const auto x_hat = lmmse_estimate(a, levels, q, Prior::gaussian(0.0, 1.0), 0.0, dist);
    mse += (x - x_hat).squaredNorm() / n;
  }
  mse /= trials;
  const double predicted = n * sd2 / m;
  CHECK(mse > 0.7 * predicted);
  CHECK(mse < 1.3 * predicted);
}

TEST_CASE("oracle with no measurements returns the prior mean") {
  const MatrixXd a(0, 2);
  const std::vector<int> y;
  const OutputChannel ch(ScalarQuantizer::regular({}), 0.0, {0.0, 1.0});
  const auto x_hat = grid_posterior_oracle(a, y, Prior::gaussian(0.4, 1.0), ch, {6.0, 481});
  CHECK(x_hat[0] == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(x_hat[1] == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("oracle half-normal mean") {
  MatrixXd a(1, 1);
  a << 1.0;
  const auto q = ScalarQuantizer::regular({0.0});
  const OutputChannel ch(q, 0.0, {0.0, 1.0});
  const std::vector<int> y{2};  // s >= 0
  const auto x_hat = grid_posterior_oracle(a, y, Prior::gaussian(0.0, 1.0), ch, {6.0, 2001});
  CHECK(x_hat[0] == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-4));
}

TEST_CASE("oracle converges under grid refinement") {
  ExperimentSpec spec = small_spec();
  spec.n = 2;
  spec.recipe.levels_count = 8;
  const auto inst = generate_instance(spec, 3, 0);
  const OutputChannel ch(inst.quantizer, 0.0, {0.0, measurement_second_moment(spec, 3)});
  const auto coarse = grid_posterior_oracle(inst.A, inst.y, spec.prior, ch, {6.0, 801});
  const auto fine = grid_posterior_oracle(inst.A, inst.y, spec.prior, ch, {6.0, 1602});
  CHECK((coarse - fine).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("oracle infeasible labels raise") {
  MatrixXd a(2, 1);
  a << 1.0, 1.0;
  const auto q = ScalarQuantizer::regular({0.0});
  const OutputChannel ch(q, 0.0, {0.0, 1.0});
  // Identical rows demanding s < 0 and s >= 0 simultaneously.
  const std::vector<int> y{1, 2};
  CHECK_THROWS_AS(grid_posterior_oracle(a, y, Prior::gaussian(0.0, 1.0), ch, {6.0, 481}),
                  OracleInfeasible);
}

TEST_CASE("oracle is weakly best and gamp tracks it on tiny instances") {
  ExperimentSpec spec = small_spec();
  spec.n = 2;
  spec.m_over_n = {1.5};
  spec.recipe.levels_count = 8;
  spec.trials = 50;
  spec.seed = 5;
  spec.estimators = {Estimator::Oracle, Estimator::Gamp, Estimator::Lmmse};
  spec.gamp.max_iters = 50;
  const auto result = run_experiment(spec);
  double avg[3] = {0, 0, 0};
  for (const auto& r : result.records) avg[static_cast<int>(r.estimator)] += r.sq_err;
  const double gamp = avg[0] / spec.trials;
  const double lmmse = avg[1] / spec.trials;
  const double oracle = avg[2] / spec.trials;
  CHECK(oracle <= gamp * (1.0 + 1e-9));
  CHECK(oracle <= lmmse * (1.0 + 1e-9));
  CHECK(std::abs(gamp - oracle) / oracle < 0.15);
}

TEST_CASE("run_experiment emits one row per trial and estimator") {
  ExperimentSpec spec = small_spec();
  spec.trials = 1;
  spec.estimators = {Estimator::Gamp};
  const auto result = run_experiment(spec);
  REQUIRE(result.records.size() == 1);
  const auto csv = result.csv();
  CHECK(csv.substr(0, csv.find('\n')) == "m_over_n,estimator,trial,sq_err,sq_err_db,iters,flag");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("experiment csv is byte-identical across runs and thread modes") {
  const auto spec = small_spec();
  const auto r1 = run_experiment(spec);
  const auto r2 = run_experiment(spec);
  CHECK(r1.csv() == r2.csv());
  ExperimentSpec serial = spec;
  serial.parallel_trials = false;
  CHECK(run_experiment(serial).csv() == r1.csv());
}

TEST_CASE("experiment spec parsing") {
  const std::string text = R"(
# comment
n = 100
m_over_n = 3, 4
trials = 7
seed = 99
estimators = gamp, lmmse
prior.kind = gaussian
prior.mean = 0
prior.variance = 1
quantizer.recipe = uniform_sigma
quantizer.levels_count = 16
quantizer.loading_sigmas = 3
gamp.max_iters = 40
)";
  const auto spec = parse_experiment_spec(text);
  CHECK(spec.n == 100);
  CHECK(spec.m_over_n == std::vector<double>{3.0, 4.0});
  CHECK(spec.trials == 7);
  CHECK(spec.seed == 99);
  CHECK(spec.estimators.size() == 2);
  CHECK(spec.gamp.max_iters == 40);

  CHECK_THROWS_AS(parse_experiment_spec("n = 4\nm_over_n = 1\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_spec("n = 4\n"), ConfigError);          // missing m_over_n
  CHECK_THROWS_AS(parse_experiment_spec("n = 4\nn = 5\nm_over_n = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_spec("n = 4096\nm_over_n = 4096\n"), ConfigError);  // cap

  const std::string fixed = R"(
n = 8
m_over_n = 2
quantizer.recipe = fixed
quantizer.kind = modulo
quantizer.delta = 0.5
quantizer.labels = 4
)";
  const auto spec2 = parse_experiment_spec(fixed);
  CHECK(spec2.recipe.mode == QuantizerRecipe::Mode::Fixed);
  CHECK(spec2.recipe.fixed.kind() == ScalarQuantizer::Kind::Modulo);
}

TEST_CASE("adaptive recipe scales the granular region per realization") {
  ExperimentSpec spec = small_spec();
  spec.recipe.mode = QuantizerRecipe::Mode::AdaptiveLinf;
  spec.recipe.levels_count = 16;
  const auto inst = generate_instance(spec, 32, 0);
  const VectorXd z = inst.A * inst.x;
  const double expected = z.lpNorm<Eigen::Infinity>();
  // Outermost thresholds sit at +/- L (1 - 2/K).
  const auto& thr = inst.quantizer.thresholds();
  CHECK(thr.back() == doctest::Approx(expected * (1.0 - 2.0 / 16)).epsilon(1e-12));
  for (int i = 0; i < 32; ++i) CHECK(inst.y[i] == inst.quantizer.encode(z[i]));
}
