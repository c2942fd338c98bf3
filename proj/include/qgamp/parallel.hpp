#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qgamp::par {

/// Caps the number of OpenMP threads used by library kernels.
/// n <= 0 restores the hardware default.
void set_max_threads(int n);

int max_threads();

/// Data-parallel sweep over [0, n). Results must be written to disjoint
/// slots indexed by i so the outcome is schedule-independent.
template <class F>
void for_range(std::int64_t n, F&& body, bool parallel = true) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && n > 1)
  for (std::int64_t i = 0; i < n; ++i) body(i);
#else
  (void)parallel;
  for (std::int64_t i = 0; i < n; ++i) body(i);
#endif
}

/// Same contract with dynamic scheduling, for sweeps whose per-item cost
/// varies (Monte Carlo trials, refinement panels).
template <class F>
void for_range_dynamic(std::int64_t n, F&& body, bool parallel = true) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (parallel && n > 1)
  for (std::int64_t i = 0; i < n; ++i) body(i);
#else
  (void)parallel;
  for (std::int64_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace qgamp::par
