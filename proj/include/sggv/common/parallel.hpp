#pragma once

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sggv {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_max_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Applies the SGGV_THREADS cap, if set. Returns the effective thread count.
inline int apply_thread_cap_from_env() {
  if (const char* env = std::getenv("SGGV_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) set_max_threads(n);
    } catch (...) {
    }
  }
  return max_threads();
}

}  // namespace sggv
