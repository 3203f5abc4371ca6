#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace panoclone {

/// Worker count used by parallel_for. Zero selects hardware concurrency.
inline std::atomic<unsigned>& parallel_threads() {
  static std::atomic<unsigned> n{0};
  return n;
}

/// Runs body(i) for i in [0, n) over a pool of threads, handing out chunks
/// of `grain` indices. If several calls throw, the exception from the lowest
/// index is rethrown, so failures are reported deterministically.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t grain = 32) {
  if (n == 0) return;
  grain = std::max<std::size_t>(grain, 1);
  unsigned workers = parallel_threads().load();
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = unsigned(std::min<std::size_t>(workers, (n + grain - 1) / grain));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex m;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto run = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(grain);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + grain);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (i < failed_at) {
            failed_at = i;
            failure = std::current_exception();
          }
          break;
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace panoclone
