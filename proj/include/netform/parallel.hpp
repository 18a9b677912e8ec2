#pragma once

// Contiguous-chunk parallel loop with a deterministic partition.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace netform {

/// 0 means "all hardware threads".
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls body(begin, end, chunk) over [0, n) split into `threads` contiguous
/// chunks. The partition depends only on (n, threads). The first exception
/// thrown by any chunk is rethrown.
template <class Body>
void parallel_chunks(std::size_t n, int threads, Body&& body) {
  const std::size_t t = std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n));
  if (t <= 1) {
    body(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(t);
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t c = 0; c < t; ++c) {
    const std::size_t lo = n * c / t;
    const std::size_t hi = n * (c + 1) / t;
    pool.emplace_back([&, lo, hi, c] {
      try {
        body(lo, hi, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace netform
