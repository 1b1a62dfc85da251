#pragma once

#include <cstddef>
#include <span>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cams {

/// Worker count used by parallel_for; 0 means the OpenMP default.
int max_threads();
void set_max_threads(int n);

/// Static-schedule parallel loop. Bodies must write to disjoint slots; all
/// reductions happen afterwards in index order so results do not depend on
/// the thread count.
template <class F>
void parallel_for(std::ptrdiff_t n, F&& body) {
#ifdef _OPENMP
    if (n > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
        return;
    }
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

/// Fixed-order pairwise summation; deterministic and more accurate than a
/// running sum for long accumulations.
double pairwise_sum(std::span<const double> xs);

}  // namespace cams
