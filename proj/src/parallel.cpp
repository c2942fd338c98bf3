#include "qgamp/parallel.hpp"

#include <thread>

namespace qgamp::par {

void set_max_threads(int n) {
#ifdef _OPENMP
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace qgamp::par
