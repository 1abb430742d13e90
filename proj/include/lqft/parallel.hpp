#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lqft {

// Fixed replica chunks keyed by index, so results never depend on the worker count.
inline constexpr std::size_t kReplicaChunk = 64;

// Calls f(begin, end) for consecutive chunks of [0, n) on up to `workers` threads.
// The first exception thrown by any chunk is rethrown after all threads join.
template <typename F>
void for_each_chunk(std::size_t n, int workers, F&& f, std::size_t chunk = kReplicaChunk) {
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        f(c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n_chunks;
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(n_chunks)));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace lqft
