// Times the OpenMP kernels against their serial counterparts: the GAMP
// sweep (production parallel / production serial / naive reference), the
// d2_bar quadrature, and the Monte Carlo trial loop.

#include <chrono>
#include <cstdio>
#include <functional>

#include "qgamp/gamp.hpp"
#include "qgamp/harness.hpp"
#include "qgamp/parallel.hpp"
#include "qgamp/rng.hpp"
#include "qgamp/state_evolution.hpp"

using namespace qgamp;

namespace {

double time_it(const std::function<void()>& fn, int min_reps = 3, double min_seconds = 0.3) {
  using clock = std::chrono::steady_clock;
  fn();  // warm up
  int reps = 0;
  const auto start = clock::now();
  double elapsed = 0.0;
  while (reps < min_reps || elapsed < min_seconds) {
    fn();
    ++reps;
    elapsed = std::chrono::duration<double>(clock::now() - start).count();
  }
  return elapsed / reps;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name, serial * 1e3,
              parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", par::max_threads());

  // GAMP sweep on a mid-size instance.
  {
    ExperimentSpec spec;
    spec.n = 400;
    spec.m_over_n = {2.0};
    spec.prior = Prior::gaussian(0.0, 1.0);
    spec.recipe.mode = QuantizerRecipe::Mode::UniformSigma;
    spec.recipe.levels_count = 16;
    spec.seed = 7;
    const int m = 800;
    const Instance inst = generate_instance(spec, m, 0);
    const OutputChannel channel(inst.quantizer, 0.0, {0.0, 0.5});
    const Eigen::MatrixXd a2 = inst.A.cwiseAbs2();

    GampConfig cfg;
    auto run_steps = [&](bool parallel, bool naive) {
      GampState state = gamp_init(spec.prior, spec.n, m);
      GampConfig c = cfg;
      c.parallel = parallel;
      for (int t = 0; t < 10; ++t) {
        if (naive)
          reference::gamp_step_serial(state, inst.A, a2, inst.y, channel, spec.prior, c);
        else
          gamp_step(state, inst.A, a2, inst.y, channel, spec.prior, c);
      }
    };
    const double t_ref = time_it([&] { run_steps(false, true); });
    const double t_serial = time_it([&] { run_steps(false, false); });
    const double t_par = time_it([&] { run_steps(true, false); });
    std::printf("gamp_step x10 (n=400, m=800, 16 levels)\n");
    report("  naive reference", t_ref, t_par);
    report("  production", t_serial, t_par);
  }

  // d2_bar on a modulo channel (many cells per label).
  {
    const SeProblem prob{0.5, 0.0, Prior::gaussian(0.0, 1.0),
                         ScalarQuantizer::modulo(0.3 * std::sqrt(0.5), 4)};
    SeConfig cfg;
    const double nu = 0.05;
    const double t_serial = time_it([&] { (void)reference::d2_bar_serial(nu, prob, cfg); });
    cfg.parallel = true;
    const double t_par = time_it([&] { (void)d2_bar(nu, prob, cfg); });
    std::printf("\nd2_bar (modulo, 4 labels)\n");
    report("  kernel", t_serial, t_par);
  }

  // Monte Carlo trial loop.
  {
    ExperimentSpec spec;
    spec.n = 100;
    spec.m_over_n = {3.0};
    spec.prior = Prior::gaussian(0.0, 1.0);
    spec.recipe.mode = QuantizerRecipe::Mode::UniformSigma;
    spec.recipe.levels_count = 16;
    spec.trials = 40;
    spec.seed = 11;
    spec.estimators = {Estimator::Gamp, Estimator::Lmmse};
    spec.gamp.max_iters = 100;
    ExperimentSpec serial = spec;
    serial.parallel_trials = false;
    const double t_serial = time_it([&] { (void)run_experiment(serial); });
    const double t_par = time_it([&] { (void)run_experiment(spec); });
    std::printf("\nrun_experiment (40 trials, gamp+lmmse)\n");
    report("  trial loop", t_serial, t_par);
  }
  return 0;
}
