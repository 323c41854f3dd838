#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace seqgeom {

/**
 * Runs body(i) for i in [0, count) on `workers` threads pulling fixed-size
 * chunks from a shared counter. The body must write only to slot i of any
 * shared output, so results do not depend on scheduling. The first exception
 * thrown by any body is rethrown after all threads join.
 */
template <class Body>
void parallel_for(std::int64_t count, int workers, Body&& body) {
  workers = std::max(1, workers);
  if (workers == 1 || count < 2) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  constexpr std::int64_t chunk = 16;
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t start = next.fetch_add(chunk);
      if (start >= count) return;
      const std::int64_t stop = std::min(count, start + chunk);
      try {
        for (std::int64_t i = start; i < stop; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace seqgeom
