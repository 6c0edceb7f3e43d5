#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace chainlab {

/// Number of worker threads used by parallel loops; 0 selects hardware concurrency.
void set_worker_count(unsigned workers) noexcept;
unsigned worker_count() noexcept;

/// Runs task(i) for i in [0, n_tasks) on the worker pool. Tasks must write
/// only to their own output slot; callers reduce slots in index order so the
/// result never depends on the schedule. The first exception thrown by any
/// task is rethrown after all workers join.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

/// Maps task(i) over [0, n_tasks) in parallel and returns the results in index order.
template <class Fn>
auto parallel_map(std::size_t n_tasks, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  std::vector<decltype(fn(std::size_t{}))> out(n_tasks);
  parallel_for(n_tasks, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace chainlab
