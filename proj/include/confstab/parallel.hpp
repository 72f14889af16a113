// Minimal deterministic parallel loop: indices are striped into contiguous
// blocks and every index writes only its own output slot, so the thread
// count never changes results.
#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace confstab {

inline int env_thread_default() {
  if (const char* env = std::getenv("CONFSTAB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int lo = static_cast<int>(static_cast<long long>(count) * t / threads);
    const int hi = static_cast<int>(static_cast<long long>(count) * (t + 1) / threads);
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace confstab
