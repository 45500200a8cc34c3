#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace krein {

/// Runs fn(i) for i in [0, n).  Work items must be independent and write
/// only to slots owned by their own index, so the result is identical to the
/// serial loop regardless of scheduling.  Falls back to the plain loop when
/// the machine (or max_threads) offers a single thread or n is tiny.  The
/// first exception thrown by any item is rethrown after all workers join.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         std::size_t max_threads = 0) {
  std::size_t hw = max_threads ? max_threads : std::thread::hardware_concurrency();
  if (hw < 2 || n < 4) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  hw = std::min(hw, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(hw);
  for (std::size_t t = 0; t < hw; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace krein
