#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace slio {

/// Resolves a thread-count setting: 0 means hardware concurrency.
inline int resolve_threads(int requested) {
  if (requested > 0) {
    return requested;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(chunk_index, begin, end) over [0, count) split into contiguous
/// chunks, one per worker. Chunk boundaries depend only on (count, threads),
/// so per-chunk accumulators combined in chunk order give reproducible
/// floating-point sums.
template <typename Fn>
void parallel_chunks(std::size_t count, int threads, Fn&& fn) {
  const int workers = resolve_threads(threads);
  if (workers <= 1 || count < 1024) {
    fn(0, std::size_t{0}, count);
    return;
  }
  const std::size_t n_chunks = static_cast<std::size_t>(workers);
  const std::size_t chunk = (count + n_chunks - 1) / n_chunks;
  std::vector<std::thread> pool;
  pool.reserve(n_chunks);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) {
      break;
    }
    pool.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
  }
  for (std::thread& t : pool) {
    t.join();
  }
}

}  // namespace slio
