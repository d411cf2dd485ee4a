#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace mlindex {

// Runs fn(i) for i in [0, n). Each call must only touch its own output slot;
// results are then independent of the worker count.
template <class Fn>
void parallel_for(size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  unsigned workers = static_cast<unsigned>(std::min<size_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      size_t i;
      while ((i = next.fetch_add(1)) < n) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace mlindex
