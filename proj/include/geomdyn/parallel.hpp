#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace geomdyn {

// Worker count from GEOMDYN_WORKERS, else the hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("GEOMDYN_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs task(i) for i in [0, n) on at most `workers` threads. The first
// exception thrown by any task is rethrown after all threads join.
template <class Task>
void parallel_for(int n, int workers, Task&& task) {
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto loop = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(workers, 1, std::max(n, 1));
  if (threads == 1) {
    loop();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(loop);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace geomdyn
