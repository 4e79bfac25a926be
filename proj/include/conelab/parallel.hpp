#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace conelab {

inline unsigned worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Splits [0, n) into contiguous chunks, one per worker, and calls
/// body(begin, end, worker). Chunk boundaries depend only on n and the worker
/// count, so callers reducing per-worker results in worker order stay
/// deterministic. The first exception thrown by a worker is rethrown after
/// all workers finish.
template <class Body>
void parallel_chunks(std::size_t n, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    body(std::size_t{0}, n, 0u);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t step = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = std::min(n, w * step), e = std::min(n, b + step);
    pool.emplace_back([&, b, e, w] {
      try {
        body(b, e, w);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace conelab
