#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace polctl {

/// Run `count` independent jobs and collect their results in index order.
/// Jobs own their RNG streams (seeded from the job index), so the parallel
/// and serial paths produce identical vectors; the serial path is the
/// reference the parallel one is tested against.
template <typename Result, typename Fn>
std::vector<Result> run_jobs(std::size_t count, const Fn& fn, bool parallel) {
  std::vector<Result> out(count);
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i)
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    return out;
  }
#else
  (void)parallel;
#endif
  for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
  return out;
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace polctl
