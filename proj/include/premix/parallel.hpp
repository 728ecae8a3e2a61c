#ifndef PREMIX_PARALLEL_HPP
#define PREMIX_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace premix {

// Runs fn(i) for i in [0, count).  With workers <= 1 this is a plain loop.
// Otherwise items are handed out through an atomic counter; fn must be safe
// to call concurrently for distinct i.  The first exception thrown by any
// worker is rethrown on the calling thread after all workers join.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned spawn = workers < count ? workers : static_cast<unsigned>(count);
  pool.reserve(spawn);
  for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Worker count from the PREMIX_WORKERS environment variable; defaults to 1
// so every run is serial (and timing comparisons meaningful) unless asked.
inline unsigned env_workers() {
  const char* s = std::getenv("PREMIX_WORKERS");
  if (!s) return 1;
  long v = std::strtol(s, nullptr, 10);
  if (v < 1) return 1;
  if (v > 256) return 256;
  return static_cast<unsigned>(v);
}

}  // namespace premix

#endif  // PREMIX_PARALLEL_HPP
