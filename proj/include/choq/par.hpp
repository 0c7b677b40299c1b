#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

// Thin wrapper so the hot loops (kernel rows, box sums, sweeps) can be run
// either OpenMP-parallel or serially.  The serial path is the reference the
// tests compare against; both paths execute the same per-index body, and the
// per-index work never shares accumulators, so results are bitwise identical.

namespace choq::par {

inline bool& parallel_enabled() {
  static bool enabled = true;
  return enabled;
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <class F>
void for_index(std::ptrdiff_t n, F&& fn) {
#ifdef _OPENMP
  if (parallel_enabled()) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

// RAII guard for flipping the run mode inside tests and benchmarks.
struct serial_scope {
  bool saved;
  serial_scope() : saved(parallel_enabled()) { parallel_enabled() = false; }
  ~serial_scope() { parallel_enabled() = saved; }
};

}  // namespace choq::par
