#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace esfem {

// Resolves a thread-count request: 0 means "all hardware threads".
inline int resolveThreads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static range partition. Each worker owns disjoint [begin, end) chunks and
// writes only to its own indices, so results are identical for any thread
// count; reductions over the produced slots must run in index order.
inline void parallelFor(std::size_t n, int threads,
                        const std::function<void(std::size_t, std::size_t)>& body) {
  threads = resolveThreads(threads);
  if (n == 0) return;
  if (threads <= 1 || n < 256) {
    body(0, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace esfem
