#include "qgamp/harness.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "qgamp/kvconfig.hpp"
#include "qgamp/parallel.hpp"
#include "qgamp/rng.hpp"

namespace qgamp {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return (v.size() % 2 == 1) ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

QuantizerRecipe parse_recipe(const KvBlock& kv) {
  QuantizerRecipe recipe;
  const std::string mode = kv.get_or("quantizer.recipe", "uniform_sigma");
  if (mode == "fixed") {
    recipe.mode = QuantizerRecipe::Mode::Fixed;
    recipe.fixed = parse_quantizer_block(kv);
    return recipe;
  }
  if (mode == "uniform_sigma") {
    recipe.mode = QuantizerRecipe::Mode::UniformSigma;
  } else if (mode == "adaptive_linf") {
    recipe.mode = QuantizerRecipe::Mode::AdaptiveLinf;
  } else {
    throw ConfigError("unknown quantizer.recipe: " + mode);
  }
  if (kv.has("quantizer.levels_count"))
    recipe.levels_count = static_cast<int>(kv.get_int("quantizer.levels_count"));
  if (kv.has("quantizer.loading_sigmas"))
    recipe.loading_sigmas = kv.get_double("quantizer.loading_sigmas");
  if (recipe.levels_count < 1) throw ConfigError("quantizer.levels_count must be >= 1");
  if (!(recipe.loading_sigmas > 0.0)) throw ConfigError("quantizer.loading_sigmas must be > 0");
  return recipe;
}

}  // namespace

std::string estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Gamp: return "gamp";
    case Estimator::Lmmse: return "lmmse";
    case Estimator::Oracle: return "oracle";
  }
  return "?";
}

ExperimentSpec parse_experiment_spec(const std::string& text) {
  const KvBlock kv = KvBlock::parse(text);
  kv.require_known_keys({
      "n", "m_over_n", "trials", "seed", "sigma2", "estimators",
      "prior.kind", "prior.mean", "prior.variance", "prior.rho", "prior.on_variance",
      "quantizer.recipe", "quantizer.kind", "quantizer.thresholds", "quantizer.levels",
      "quantizer.binning", "quantizer.delta", "quantizer.labels", "quantizer.levels_count",
      "quantizer.loading_sigmas",
      "gamp.max_iters", "gamp.stop_tol", "gamp.damping",
      "oracle.points_per_axis",
  });

  ExperimentSpec spec;
  spec.n = static_cast<int>(kv.get_int("n"));
  if (spec.n < 1) throw ConfigError("n must be >= 1");
  spec.m_over_n = kv.get_double_list("m_over_n");
  if (spec.m_over_n.empty()) throw ConfigError("m_over_n must be a nonempty list");
  spec.prior = parse_prior_block(kv);
  spec.recipe = parse_recipe(kv);
  spec.sigma2 = kv.has("sigma2") ? kv.get_double("sigma2") : 0.0;
  if (!(spec.sigma2 >= 0.0)) throw ConfigError("sigma2 must be >= 0");
  spec.trials = kv.has("trials") ? static_cast<int>(kv.get_int("trials")) : 1;
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");
  spec.seed = kv.has("seed") ? kv.get_u64("seed") : 1;

  spec.estimators.clear();
  for (const auto& name : kv.has("estimators") ? kv.get_string_list("estimators")
                                               : std::vector<std::string>{"gamp"}) {
    if (name == "gamp") spec.estimators.push_back(Estimator::Gamp);
    else if (name == "lmmse") spec.estimators.push_back(Estimator::Lmmse);
    else if (name == "oracle") spec.estimators.push_back(Estimator::Oracle);
    else throw ConfigError("unknown estimator: " + name);
  }
  if (spec.estimators.empty()) throw ConfigError("estimators must be nonempty");

  if (kv.has("gamp.max_iters")) spec.gamp.max_iters = static_cast<int>(kv.get_int("gamp.max_iters"));
  if (kv.has("gamp.stop_tol")) spec.gamp.stop_tol = kv.get_double("gamp.stop_tol");
  if (kv.has("gamp.damping")) spec.gamp.damping = kv.get_double("gamp.damping");
  if (spec.gamp.max_iters < 1) throw ConfigError("gamp.max_iters must be >= 1");
  if (!(spec.gamp.damping > 0.0) || spec.gamp.damping > 1.0)
    throw ConfigError("gamp.damping must be in (0, 1]");
  if (kv.has("oracle.points_per_axis"))
    spec.oracle_points_per_axis = static_cast<int>(kv.get_int("oracle.points_per_axis"));

  for (double r : spec.m_over_n) {
    const auto m = static_cast<std::int64_t>(std::lround(r * spec.n));
    if (m < 1) throw ConfigError("m_over_n entry gives m < 1");
    if (m * spec.n > kMaxMatrixEntries) throw ConfigError("m * n exceeds the memory cap");
  }
  return spec;
}

Prior parse_prior_block(const KvBlock& kv) {
  const std::string kind = kv.get_or("prior.kind", "gaussian");
  if (kind == "gaussian") {
    return Prior::gaussian(kv.has("prior.mean") ? kv.get_double("prior.mean") : 0.0,
                           kv.has("prior.variance") ? kv.get_double("prior.variance") : 1.0);
  }
  if (kind == "gauss_bernoulli") {
    return Prior::gauss_bernoulli(kv.get_double("prior.rho"), kv.get_double("prior.on_variance"));
  }
  throw ConfigError("unknown prior.kind: " + kind);
}

ScalarQuantizer parse_quantizer_block(const KvBlock& kv) {
  KvBlock sub;
  for (const char* key : {"kind", "thresholds", "levels", "binning", "delta", "labels"}) {
    const std::string full = std::string("quantizer.") + key;
    if (kv.has(full)) sub.set(key, kv.get(full));
  }
  return ScalarQuantizer::from_kv(sub.to_text());
}

double measurement_second_moment(const ExperimentSpec& spec, int m) {
  const double x2 = spec.prior.variance() + spec.prior.mean() * spec.prior.mean();
  return static_cast<double>(spec.n) / m * x2;
}

Instance generate_instance(const ExperimentSpec& spec, int m, int trial) {
  Rng rng(derive_stream(spec.seed, static_cast<std::uint64_t>(m),
                        static_cast<std::uint64_t>(trial)));
  const int n = spec.n;

  Instance inst;
  inst.x.resize(n);
  if (spec.prior.is_gaussian()) {
    for (int j = 0; j < n; ++j)
      inst.x[j] = rng.normal(spec.prior.gauss_mean(), spec.prior.gauss_variance());
  } else {
    for (int j = 0; j < n; ++j) {
      const bool on = rng.uniform() <= spec.prior.rho();
      inst.x[j] = on ? rng.normal(0.0, spec.prior.on_variance()) : 0.0;
    }
  }

  inst.A.resize(m, n);
  const double a_sd = 1.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) inst.A(i, j) = a_sd * rng.normal();

  inst.w = Eigen::VectorXd::Zero(m);
  if (spec.sigma2 > 0.0)
    for (int i = 0; i < m; ++i) inst.w[i] = rng.normal(0.0, spec.sigma2);

  const Eigen::VectorXd z = inst.A * inst.x;
  switch (spec.recipe.mode) {
    case QuantizerRecipe::Mode::Fixed:
      inst.quantizer = spec.recipe.fixed;
      break;
    case QuantizerRecipe::Mode::UniformSigma: {
      const double sd = std::sqrt(measurement_second_moment(spec, m) + spec.sigma2);
      inst.quantizer = ScalarQuantizer::uniform_regular(spec.recipe.levels_count,
                                                        spec.recipe.loading_sigmas * sd);
      break;
    }
    case QuantizerRecipe::Mode::AdaptiveLinf: {
      double loading = z.lpNorm<Eigen::Infinity>();
      if (!(loading > 0.0)) loading = 1e-6;
      inst.quantizer = ScalarQuantizer::uniform_regular(spec.recipe.levels_count, loading);
      break;
    }
  }

  inst.y.resize(m);
  for (int i = 0; i < m; ++i) inst.y[i] = inst.quantizer.encode(z[i] + inst.w[i]);
  return inst;
}

Eigen::VectorXd lmmse_estimate(const Eigen::MatrixXd& A, const Eigen::VectorXd& y_levels,
                               const ScalarQuantizer& quantizer, const Prior& prior,
                               double sigma2, const GaussianSource& input_dist) {
  const double var_x = prior.variance();
  const double mu_x = prior.mean();
  double noise_var = quantizer.measurement_distortion(input_dist) + sigma2;
  if (noise_var < 1e-12) noise_var = 1e-12;  // jitter keeps the solve SPD

  Eigen::MatrixXd gram = var_x * (A * A.transpose());
  gram.diagonal().array() += noise_var;
  Eigen::VectorXd rhs = y_levels;
  if (mu_x != 0.0) rhs -= A * Eigen::VectorXd::Constant(A.cols(), mu_x);
  const Eigen::VectorXd sol = gram.ldlt().solve(rhs);
  Eigen::VectorXd x_hat = var_x * (A.transpose() * sol);
  if (mu_x != 0.0) x_hat.array() += mu_x;
  return x_hat;
}

Eigen::VectorXd grid_posterior_oracle(const Eigen::MatrixXd& A, const std::vector<int>& y,
                                      const Prior& prior, const OutputChannel& channel,
                                      const OracleGrid& grid) {
  const int n = static_cast<int>(A.cols());
  const auto m = A.rows();
  if (n < 1 || n > 3) throw std::invalid_argument("grid oracle: n must be 1..3");
  if (static_cast<Eigen::Index>(y.size()) != m)
    throw std::invalid_argument("grid oracle: y size mismatch");
  if (grid.points_per_axis < 400)
    throw std::invalid_argument("grid oracle: need >= 400 points per axis");

  // Midpoint nodes with prior weights. box_var is the variance of a uniform
  // draw over the node's grid cell; projecting it through the measurement
  // rows smooths the channel indicator so the quadrature converges O(dx^2)
  // instead of stalling on the cell boundaries. Gauss-Bernoulli adds the
  // point mass at zero (box_var 0) next to the discretized slab component.
  struct Node {
    double x;
    double w;
    double box_var;
  };
  std::vector<Node> axis;
  const double sd = std::sqrt(prior.is_gaussian() ? prior.gauss_variance() : prior.on_variance());
  const double center = prior.is_gaussian() ? prior.gauss_mean() : 0.0;
  const double lo = center - grid.half_width_sigmas * sd;
  const double dx = 2.0 * grid.half_width_sigmas * sd / grid.points_per_axis;
  const double scale =
      (prior.is_gaussian() ? 1.0 : prior.rho()) / (std::sqrt(2.0 * std::numbers::pi) * sd) * dx;
  for (int k = 0; k < grid.points_per_axis; ++k) {
    const double x = lo + (k + 0.5) * dx;
    const double t = (x - center) / sd;
    axis.push_back({x, scale * std::exp(-0.5 * t * t), dx * dx / 12.0});
  }
  if (!prior.is_gaussian()) axis.push_back({0.0, 1.0 - prior.rho(), 0.0});

  const double sigma2 = channel.noise_variance();
  auto cell_mass = [&](int label, double z, double var) {
    const CellSet& cells = channel.cells(label);
    if (var <= 0.0) return cells.contains(z) ? 1.0 : 0.0;
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& iv : cells.intervals()) {
      if (iv.contains(z)) {
        dist = 0.0;
        break;
      }
      dist = std::min(dist, std::min(std::abs(z - iv.lo), std::abs(z - iv.hi)));
    }
    if (dist * dist > 200.0 * var) return 0.0;  // mass < 1e-44, prune the branch
    const auto mm = trunc_gauss_moments(cells, z, var);
    return mm.degenerate ? 0.0 : mm.mass;
  };

  Eigen::VectorXd z_partial = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd var_partial = Eigen::VectorXd::Constant(m, sigma2);
  Eigen::VectorXd x_point(n);
  double total = 0.0;
  bool exact_hit = false;  // some grid point satisfies every label exactly
  Eigen::VectorXd accum = Eigen::VectorXd::Zero(n);

  auto recurse = [&](auto&& self, int depth, double w_partial) -> void {
    if (depth == n) {
      double w = w_partial;
      bool inside = true;
      for (Eigen::Index i = 0; i < m && (w > 0.0 || inside); ++i) {
        w *= cell_mass(y[i], z_partial[i], var_partial[i]);
        inside = inside && channel.cells(y[i]).contains(z_partial[i]);
      }
      exact_hit |= inside;
      if (w > 0.0) {
        total += w;
        accum += w * x_point;
      }
      return;
    }
    const Eigen::VectorXd col = A.col(depth);
    const Eigen::VectorXd col2 = col.cwiseAbs2();
    const Eigen::VectorXd saved_z = z_partial;
    const Eigen::VectorXd saved_var = var_partial;
    for (const Node& node : axis) {
      x_point[depth] = node.x;
      z_partial = saved_z + node.x * col;
      var_partial = saved_var + node.box_var * col2;
      self(self, depth + 1, w_partial * node.w);
    }
    z_partial = saved_z;
    var_partial = saved_var;
  };
  recurse(recurse, 0, 1.0);

  if (sigma2 == 0.0 && !exact_hit)
    throw OracleInfeasible("grid oracle: labels are inconsistent on the grid");
  if (!(total > 0.0)) throw OracleInfeasible("grid oracle: labels have zero posterior mass");
  return accum / total;
}

std::string ExperimentResult::csv() const {
  std::string out = "m_over_n,estimator,trial,sq_err,sq_err_db,iters,flag\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.12g,%s,%d,%.12g,%.12g,%d,%d\n", r.m_over_n,
                  estimator_name(r.estimator).c_str(), r.trial, r.sq_err, to_db(r.sq_err),
                  r.iters, r.flag);
    out += buf;
  }
  return out;
}

std::vector<MedianRow> ExperimentResult::medians() const {
  std::vector<MedianRow> rows;
  std::vector<std::pair<double, Estimator>> keys;
  for (const auto& r : records) {
    const std::pair<double, Estimator> key{r.m_over_n, r.estimator};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& key : keys) {
    std::vector<double> errs, iters;
    for (const auto& r : records) {
      if (r.m_over_n == key.first && r.estimator == key.second) {
        errs.push_back(r.sq_err);
        iters.push_back(r.iters);
      }
    }
    rows.push_back({key.first, key.second, median_of(errs), median_of(iters)});
  }
  return rows;
}

std::string ExperimentResult::median_table() const {
  std::string out = "m_over_n estimator median_sq_err median_db median_iters\n";
  char buf[256];
  for (const auto& r : medians()) {
    std::snprintf(buf, sizeof(buf), "%-8.4g %-9s %-13.6g %-9.3f %.1f\n", r.m_over_n,
                  estimator_name(r.estimator).c_str(), r.median_sq_err, to_db(r.median_sq_err),
                  r.median_iters);
    out += buf;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const int num_ratios = static_cast<int>(spec.m_over_n.size());
  const int num_est = static_cast<int>(spec.estimators.size());
  for (Estimator e : spec.estimators) {
    if (e == Estimator::Oracle && spec.n > 3)
      throw ConfigError("oracle estimator requires n <= 3");
  }

  ExperimentResult result;
  result.records.resize(static_cast<std::size_t>(num_ratios) * spec.trials * num_est);

  const std::int64_t jobs = static_cast<std::int64_t>(num_ratios) * spec.trials;
  par::for_range_dynamic(
      jobs,
      [&](std::int64_t job) {
        const int ri = static_cast<int>(job / spec.trials);
        const int trial = static_cast<int>(job % spec.trials);
        const double ratio = spec.m_over_n[ri];
        const int m = static_cast<int>(std::lround(ratio * spec.n));

        const Instance inst = generate_instance(spec, m, trial);
        const double var_s = measurement_second_moment(spec, m) + spec.sigma2;
        const OutputChannel channel(inst.quantizer, spec.sigma2, GaussianSource{0.0, var_s});

        for (int ei = 0; ei < num_est; ++ei) {
          TrialRecord rec;
          rec.m_over_n = ratio;
          rec.m = m;
          rec.estimator = spec.estimators[ei];
          rec.trial = trial;
          const double t0 = now_seconds();
          switch (rec.estimator) {
            case Estimator::Gamp: {
              GampConfig cfg = spec.gamp;
              cfg.parallel = false;  // trials already run in parallel
              const GampResult g = gamp_run(inst.A, inst.y, channel, spec.prior, cfg, &inst.x);
              rec.sq_err = (inst.x - g.x_hat).squaredNorm() / spec.n;
              rec.iters = g.iters;
              rec.flag = g.diverged ? 1 : 0;
              break;
            }
            case Estimator::Lmmse: {
              Eigen::VectorXd levels(m);
              for (int i = 0; i < m; ++i) levels[i] = inst.quantizer.decode(inst.y[i]);
              const Eigen::VectorXd x_hat = lmmse_estimate(
                  inst.A, levels, inst.quantizer, spec.prior, spec.sigma2,
                  GaussianSource{0.0, var_s});
              rec.sq_err = (inst.x - x_hat).squaredNorm() / spec.n;
              break;
            }
            case Estimator::Oracle: {
              OracleGrid grid;
              grid.points_per_axis = spec.oracle_points_per_axis;
              try {
                const Eigen::VectorXd x_hat =
                    grid_posterior_oracle(inst.A, inst.y, spec.prior, channel, grid);
                rec.sq_err = (inst.x - x_hat).squaredNorm() / spec.n;
              } catch (const OracleInfeasible&) {
                rec.sq_err = std::numeric_limits<double>::quiet_NaN();
                rec.flag = 2;
              }
              break;
            }
          }
          rec.wall_time = now_seconds() - t0;
          const std::size_t idx = (static_cast<std::size_t>(ri) * spec.trials + trial) * num_est + ei;
          result.records[idx] = rec;
        }
      },
      spec.parallel_trials);
  return result;
}

double to_db(double mse) { return 10.0 * std::log10(mse); }

}  // namespace qgamp
