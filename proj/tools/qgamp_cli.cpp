#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qgamp/harness.hpp"
#include "qgamp/kvconfig.hpp"
#include "qgamp/parallel.hpp"
#include "qgamp/qdesign.hpp"

using namespace qgamp;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
}

std::string csv_rows_with_label(const ExperimentResult& result, const std::string& label) {
  std::string out;
  char buf[256];
  for (const auto& r : result.records) {
    std::snprintf(buf, sizeof(buf), "%.12g,%s,%d,%.12g,%.12g,%d,%d\n", r.m_over_n, label.c_str(),
                  r.trial, r.sq_err, to_db(r.sq_err), r.iters, r.flag);
    out += buf;
  }
  return out;
}

struct QuantizerSweepPoint {
  std::string label;
  ScalarQuantizer quantizer = ScalarQuantizer::regular({});
  double predicted_mse = 0.0;  // NaN for the Lloyd baseline
};

// Lloyd baseline plus SE-optimized regular and modulo designs at one rate.
std::vector<QuantizerSweepPoint> design_three(int levels, double beta, const Prior& prior) {
  const double sigma_z = std::sqrt(beta * prior.variance());
  DesignObjective obj;
  obj.beta = beta;
  obj.sigma2 = 0.0;
  obj.prior = prior;

  std::vector<QuantizerSweepPoint> points;
  const auto ll = lloyd(levels, GaussianSource{0.0, beta * prior.variance()});
  points.push_back({"gamp_lloyd_k" + std::to_string(levels), ll.quantizer,
                    std::numeric_limits<double>::quiet_NaN()});
  const auto reg =
      optimize_family(FamilyKind::Regular, levels, obj, {0.3 * sigma_z, 8.0 * sigma_z, 17});
  points.push_back({"gamp_regopt_k" + std::to_string(levels), reg.quantizer, reg.predicted_mse});
  const auto mod =
      optimize_family(FamilyKind::Modulo, levels, obj, {0.05 * sigma_z, 4.0 * sigma_z, 17});
  points.push_back({"gamp_modopt_k" + std::to_string(levels), mod.quantizer, mod.predicted_mse});
  return points;
}

std::string run_quantizer_sweep(int n, const std::vector<double>& m_over_n,
                                const std::vector<int>& level_counts, const Prior& prior,
                                int trials, std::uint64_t seed) {
  std::string csv = "m_over_n,estimator,trial,sq_err,sq_err_db,iters,flag\n";
  for (double ratio : m_over_n) {
    const double beta = 1.0 / ratio;
    for (int levels : level_counts) {
      for (const auto& point : design_three(levels, beta, prior)) {
        ExperimentSpec spec;
        spec.n = n;
        spec.m_over_n = {ratio};
        spec.prior = prior;
        spec.recipe.mode = QuantizerRecipe::Mode::Fixed;
        spec.recipe.fixed = point.quantizer;
        spec.trials = trials;
        spec.seed = seed;
        spec.estimators = {Estimator::Gamp};
        spec.gamp.max_iters = 25;
        const auto result = run_experiment(spec);
        csv += csv_rows_with_label(result, point.label);
        const double median = result.medians().front().median_sq_err;
        std::fprintf(stderr,
                     "%-16s m/n=%-5g rate=%g bits: median %.4g dB (se predicted %.4g dB)\n",
                     point.label.c_str(), ratio, ratio * std::log2(levels), to_db(median),
                     to_db(point.predicted_mse));
      }
    }
  }
  return csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAMP reconstruction from quantized linear measurements"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "limit OpenMP threads (0 = hardware)");

  std::string spec_path, out_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> trials_override;

  auto* run_cmd = app.add_subcommand("run", "run an experiment spec file, emit trial CSV");
  run_cmd->add_option("--spec", spec_path, "experiment spec file")->required();
  run_cmd->add_option("--out", out_path, "output CSV path (default stdout)");
  run_cmd->add_option("--seed", seed_override, "override the spec seed");
  run_cmd->add_option("--trials", trials_override, "override the spec trial count");

  auto* se_cmd = app.add_subcommand("se", "run the state-evolution recursion, emit t,tau CSV");
  se_cmd->add_option("--spec", spec_path, "SE problem spec file")->required();
  se_cmd->add_option("--out", out_path, "output CSV path (default stdout)");

  std::string family = "regular", prior_kind = "gaussian";
  int levels = 16;
  double beta = 0.5, sigma2 = 0.0, bracket_lo = 0.0, bracket_hi = 0.0;
  double rho = 1.0 / 32.0, on_variance = 32.0;
  auto* design_cmd = app.add_subcommand("design", "SE-optimal scalar parameter for a family");
  design_cmd->add_option("--family", family, "regular | modulo")
      ->check(CLI::IsMember({"regular", "modulo"}));
  design_cmd->add_option("--levels", levels, "label count K (or N for modulo)");
  design_cmd->add_option("--beta", beta, "measurement ratio n/m");
  design_cmd->add_option("--sigma2", sigma2, "pre-quantization noise variance");
  design_cmd->add_option("--prior", prior_kind, "gaussian | gauss_bernoulli")
      ->check(CLI::IsMember({"gaussian", "gauss_bernoulli"}));
  design_cmd->add_option("--rho", rho, "gauss_bernoulli sparsity ratio");
  design_cmd->add_option("--on-variance", on_variance, "gauss_bernoulli on-component variance");
  design_cmd->add_option("--lo", bracket_lo, "bracket lower bound (default scale-derived)");
  design_cmd->add_option("--hi", bracket_hi, "bracket upper bound (default scale-derived)");
  design_cmd->add_option("--out", out_path, "output CSV path (default stdout)");

  auto* fig4_cmd = app.add_subcommand("fig4", "oversampled Gaussian: GAMP vs LMMSE sweep");
  auto* fig5_cmd = app.add_subcommand("fig5", "oversampled Gaussian: quantizer design sweep");
  auto* fig6_cmd = app.add_subcommand("fig6", "compressive Gauss-Bernoulli: GAMP vs LMMSE sweep");
  auto* fig7_cmd = app.add_subcommand("fig7", "compressive Gauss-Bernoulli: quantizer designs");
  for (auto* cmd : {fig4_cmd, fig5_cmd, fig6_cmd, fig7_cmd}) {
    cmd->add_option("--out", out_path, "output CSV path (default stdout)");
    cmd->add_option("--seed", seed_override, "seed (default 12345)");
    cmd->add_option("--trials", trials_override, "trials per point");
  }

  CLI11_PARSE(app, argc, argv);
  par::set_max_threads(threads);
  const std::uint64_t seed = seed_override.value_or(12345);

  try {
    if (*run_cmd) {
      auto spec = parse_experiment_spec(slurp(spec_path));
      if (seed_override) spec.seed = *seed_override;
      if (trials_override) spec.trials = *trials_override;
      const auto result = run_experiment(spec);
      emit(result.csv(), out_path);
      std::cerr << result.median_table();
    } else if (*se_cmd) {
      const KvBlock kv = KvBlock::parse(slurp(spec_path));
      kv.require_known_keys({"beta", "sigma2", "prior.kind", "prior.mean", "prior.variance",
                             "prior.rho", "prior.on_variance", "quantizer.kind",
                             "quantizer.thresholds", "quantizer.levels", "quantizer.binning",
                             "quantizer.delta", "quantizer.labels", "se.quad_nodes",
                             "se.max_iters", "se.fp_tol"});
      const SeProblem prob{kv.get_double("beta"),
                           kv.has("sigma2") ? kv.get_double("sigma2") : 0.0,
                           parse_prior_block(kv), parse_quantizer_block(kv)};
      SeConfig cfg;
      if (kv.has("se.quad_nodes")) cfg.quad_nodes = static_cast<int>(kv.get_int("se.quad_nodes"));
      if (kv.has("se.max_iters")) cfg.max_iters = static_cast<int>(kv.get_int("se.max_iters"));
      if (kv.has("se.fp_tol")) cfg.fp_tol = kv.get_double("se.fp_tol");
      const auto traj = se_run(prob, cfg);
      std::string csv = "t,tau\n";
      char buf[64];
      for (std::size_t t = 0; t < traj.taus.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", t, traj.taus[t]);
        csv += buf;
      }
      emit(csv, out_path);
      std::fprintf(stderr, "fixed point %.12g (%s after %zu steps)\n", traj.fixed_point,
                   traj.converged ? "converged" : "not converged", traj.taus.size() - 1);
    } else if (*design_cmd) {
      DesignObjective obj;
      obj.beta = beta;
      obj.sigma2 = sigma2;
      obj.prior = (prior_kind == "gaussian") ? Prior::gaussian(0.0, 1.0)
                                             : Prior::gauss_bernoulli(rho, on_variance);
      const double sigma_z = std::sqrt(beta * obj.prior.variance());
      const FamilyKind kind = (family == "regular") ? FamilyKind::Regular : FamilyKind::Modulo;
      SearchSpec search{bracket_lo, bracket_hi, 25, 1e-4};
      if (!(search.lo > 0.0)) search.lo = (kind == FamilyKind::Regular ? 0.3 : 0.05) * sigma_z;
      if (!(search.hi > 0.0)) search.hi = (kind == FamilyKind::Regular ? 8.0 : 4.0) * sigma_z;
      const auto result = optimize_family(kind, levels, obj, search);
      char buf[160];
      std::snprintf(buf, sizeof(buf), "family,levels,param,predicted_mse_db\n%s,%d,%.12g,%.12g\n",
                    family.c_str(), levels, result.param, to_db(result.predicted_mse));
      emit(buf, out_path);
    } else if (*fig4_cmd) {
      ExperimentSpec spec;
      spec.n = 100;
      spec.m_over_n = {3.0, 4.0, 5.0, 6.0};
      spec.prior = Prior::gaussian(0.0, 1.0);
      spec.recipe.mode = QuantizerRecipe::Mode::UniformSigma;
      spec.recipe.levels_count = 16;
      spec.recipe.loading_sigmas = 3.0;
      spec.trials = trials_override.value_or(200);
      spec.seed = seed;
      spec.estimators = {Estimator::Gamp, Estimator::Lmmse};
      spec.gamp.max_iters = 25;
      const auto result = run_experiment(spec);
      emit(result.csv(), out_path);
      std::cerr << result.median_table();
    } else if (*fig5_cmd) {
      emit(run_quantizer_sweep(100, {2.0}, {2, 4, 8, 16}, Prior::gaussian(0.0, 1.0),
                               trials_override.value_or(100), seed),
           out_path);
    } else if (*fig6_cmd) {
      ExperimentSpec spec;
      spec.n = 1024;
      spec.m_over_n = {0.4, 0.6, 0.8, 1.0};
      spec.prior = Prior::gauss_bernoulli(1.0 / 32.0, 32.0);
      spec.recipe.mode = QuantizerRecipe::Mode::AdaptiveLinf;
      spec.recipe.levels_count = 16;
      spec.trials = trials_override.value_or(100);
      spec.seed = seed;
      spec.estimators = {Estimator::Gamp, Estimator::Lmmse};
      spec.gamp.max_iters = 25;
      const auto result = run_experiment(spec);
      emit(result.csv(), out_path);
      std::cerr << result.median_table();
    } else if (*fig7_cmd) {
      emit(run_quantizer_sweep(1024, {0.4, 0.7, 1.0}, {16},
                               Prior::gauss_bernoulli(1.0 / 32.0, 32.0),
                               trials_override.value_or(50), seed),
           out_path);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
