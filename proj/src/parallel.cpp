#include "momask/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace momask {

namespace {
int g_jobs = 0;
}

void set_jobs(int j) {
    g_jobs = j;
#ifdef _OPENMP
    if (j > 0) omp_set_num_threads(j);
#endif
}

int jobs() { return g_jobs; }

namespace detail {
bool omp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}
} // namespace detail

} // namespace momask
