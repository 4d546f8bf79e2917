#pragma once

#include <cstddef>
#include <functional>

namespace splitfit {

/// Worker count from the SPLITFIT_THREADS environment variable, falling back
/// to std::thread::hardware_concurrency() (at least 1).
unsigned default_worker_count();

/// Runs task(i) for i in [0, count) on `workers` threads.
///
/// Tasks are claimed dynamically, so callers must write results into slots
/// indexed by i and reduce them afterwards in index order; that keeps the
/// output independent of the schedule. The first exception thrown by a task
/// is rethrown after all workers have joined.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task);

}  // namespace splitfit
