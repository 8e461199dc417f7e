#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nfdp {

// Selects between the plain serial reference implementation of a kernel and
// its blocked OpenMP variant. Both are deterministic: the parallel kernels
// partition work into fixed-size blocks and combine per-block results in
// block order, so the outcome does not depend on thread count or scheduling.
enum class Execution { Serial, Parallel };

inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace nfdp
