#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace nvreg {

// worker count from NVREGSIM_THREADS, falling back to the hardware
inline int worker_count() {
  if (const char* env = std::getenv("NVREGSIM_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// deterministic parallel map: out[i] = fn(i); results are keyed by index so
// the outcome is independent of scheduling and worker count
template <class T, class Fn>
std::vector<T> parallel_map(long n, Fn&& fn) {
  std::vector<T> out(static_cast<size_t>(n));
  long workers = std::min<long>(worker_count(), n);
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) out[static_cast<size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<long> next{0};
  auto body = [&] {
    for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1))
      out[static_cast<size_t>(i)] = fn(i);
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (long w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace nvreg
