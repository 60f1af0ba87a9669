#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace flowgauge {

/// Worker count: FLOWGAUGE_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t default_worker_count();

/// Runs fn(i) for every i in [0, n) on up to `workers` threads. Work is
/// handed out in chunks of `grain`; fn must only write to slots it owns.
/// The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t workers = 0, std::size_t grain = 64) {
  if (n == 0) return;
  if (workers == 0) workers = default_worker_count();
  grain = std::max<std::size_t>(grain, 1);
  workers = std::min(workers, (n + grain - 1) / grain);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(grain);
        if (begin >= n) break;
        const std::size_t end = std::min(n, begin + grain);
        for (std::size_t i = begin; i < end; ++i) fn(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(n);
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace flowgauge
