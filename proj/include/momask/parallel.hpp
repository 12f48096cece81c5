#pragma once

#include <cstddef>

namespace momask {

// Global worker cap for the OpenMP kernels. 0 = runtime default.
// Parallel loops only ever write disjoint per-index outputs, so results are
// bit-identical for any thread count; reductions stay serial.
void set_jobs(int jobs);
int jobs();

namespace detail {
bool omp_enabled();
}

template <typename Fn>
void parallel_for(size_t n, Fn&& fn) {
#ifdef _OPENMP
    #pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        fn(static_cast<size_t>(i));
#else
    for (size_t i = 0; i < n; ++i) fn(i);
#endif
}

} // namespace momask
