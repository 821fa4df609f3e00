#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rrsens {

// Runs fn(job) for job in [0, n_jobs) on up to `threads` workers (0 = all
// hardware threads). Jobs must write only to their own output slots; under
// that contract the result is independent of the schedule, so any thread
// count produces identical output. The first exception thrown by a job is
// rethrown on the calling thread after all workers join.
inline void parallel_for(int n_jobs, int threads, const std::function<void(int)>& fn) {
  if (n_jobs <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (threads > n_jobs) threads = n_jobs;

  if (threads == 1) {
    for (int job = 0; job < n_jobs; ++job) fn(job);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const int job = next.fetch_add(1);
      if (job >= n_jobs) return;
      try {
        fn(job);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rrsens
