#include "agils/harness/pool.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace agils::harness {

namespace {

int env_cap() {
  const char* s = std::getenv("AGILS_MAX_THREADS");
  if (s == nullptr || *s == '\0') return 0;
  try {
    return std::max(1, std::stoi(s));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

int worker_count(int requested) {
  const int cap = env_cap();
  int n = requested > 0 ? requested : (cap > 0 ? cap : static_cast<int>(std::thread::hardware_concurrency()));
  if (cap > 0) n = std::min(n, cap);
  return std::max(1, n);
}

void run_indexed_void(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t i) {
    try {
      job(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1, workers), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace agils::harness
