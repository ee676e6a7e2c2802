#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

#include "sgq/hilbert.hpp"

namespace sgq::detail {

// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is handled
// by exactly one chunk, so per-index results do not depend on the split.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_chunk = 4096) {
  const auto workers = static_cast<std::size_t>(std::max(1, num_threads()));
  if (workers == 1 || n < 2 * min_chunk) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunks = std::min(workers, n / min_chunk);
  const std::size_t step = (n + chunks - 1) / chunks;
  std::vector<std::jthread> pool;
  pool.reserve(chunks - 1);
  for (std::size_t c = 1; c < chunks; ++c) {
    const std::size_t lo = c * step;
    const std::size_t hi = std::min(n, lo + step);
    if (lo < hi) pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  fn(std::size_t{0}, std::min(n, step));
}

}  // namespace sgq::detail
