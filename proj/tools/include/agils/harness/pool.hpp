#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace agils::harness {

/// Worker count: `requested` if positive, else AGILS_MAX_THREADS if set,
/// else hardware concurrency; AGILS_MAX_THREADS always caps the result.
int worker_count(int requested = 0);

/// Runs job(i) for i in [0, count) on up to `workers` threads. Results are
/// stored by index so the output order never depends on scheduling. The
/// first exception (lowest index) is rethrown after all jobs finish.
template <class T>
std::vector<T> run_indexed(std::size_t count, int workers, const std::function<T(std::size_t)>& job);

void run_indexed_void(std::size_t count, int workers, const std::function<void(std::size_t)>& job);

template <class T>
std::vector<T> run_indexed(std::size_t count, int workers, const std::function<T(std::size_t)>& job) {
  std::vector<T> out(count);
  run_indexed_void(count, workers, [&](std::size_t i) { out[i] = job(i); });
  return out;
}

}  // namespace agils::harness
