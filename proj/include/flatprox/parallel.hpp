#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace flatprox {

/// Worker count from FLATPROX_WORKERS, else the hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv("FLATPROX_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Calls body(i) for i in [0, n). Each index is handled exactly once; callers
/// write results into slot i, so the outcome does not depend on `workers`.
/// The first exception thrown by any body is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n, std::memory_order_relaxed);
        return;
      }
    }
  };
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> threads;
  threads.reserve(count - 1);
  for (unsigned w = 1; w < count; ++w) threads.emplace_back(run);
  run();
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace flatprox
