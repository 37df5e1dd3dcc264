#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace hypflow {

// Thread count resolution: explicit flag, then HYPFLOW_THREADS, then hardware.
int resolve_threads(int requested);

// Runs `body(i, acc)` for i in [0, n) and merges chunk accumulators in index
// order. Chunk boundaries depend only on n, so results are bit-identical for
// any thread count; replicas must key their randomness on i alone.
template <class Acc, class Body>
Acc parallel_accumulate(std::uint64_t n, Body body, int threads) {
  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Acc> partial(chunks);
  std::atomic<std::uint64_t> next{0};
  const int workers = threads > 1 ? threads : 1;

  auto work = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      Acc local;
      const std::uint64_t lo = c * kChunk;
      const std::uint64_t hi = std::min(n, lo + kChunk);
      for (std::uint64_t i = lo; i < hi; ++i) body(i, local);
      partial[c] = std::move(local);
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  Acc out;
  for (auto& p : partial) out.merge(p);
  return out;
}

}  // namespace hypflow
