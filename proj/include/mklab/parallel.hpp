#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace mklab {

// Resolves a thread-count request: values >= 1 are taken as-is, anything else
// falls back to METRIC_KNN_LAB_THREADS and then to the hardware count.
int resolve_threads(int requested);

// Runs fn(0..n_blocks-1), possibly concurrently.  Work items must be
// independent; determinism comes from seeding per block index, never from
// scheduling order.
inline void parallel_blocks(int n_blocks, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n_blocks <= 1) {
    for (int b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int b = next.fetch_add(1);
      if (b >= n_blocks) return;
      fn(b);
    }
  };
  std::vector<std::thread> pool;
  int n_workers = std::min(threads, n_blocks);
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace mklab
