#pragma once

#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coupledmc {

/// Calls fn(i) for i = 0..count-1 in order on the calling thread.
template <class Fn>
void for_each_repeat_serial(std::uint64_t count, Fn&& fn) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
}

/// Calls fn(i) for every i in [0, count) on `workers` OpenMP threads.
/// fn must only write to slot i of its outputs; results are then identical to
/// the serial version whatever the schedule.
template <class Fn>
void for_each_repeat(std::uint64_t count, int workers, Fn&& fn) {
#ifdef _OPENMP
    if (workers > 1 && count > 1) {
        const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 64) num_threads(workers)
        for (std::int64_t i = 0; i < n; ++i) fn(static_cast<std::uint64_t>(i));
        return;
    }
#else
    (void)workers;
#endif
    for_each_repeat_serial(count, fn);
}

/// Threads available to OpenMP, or 1 in a serial build.
inline int hardware_workers() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace coupledmc
