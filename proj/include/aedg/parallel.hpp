#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace aedg {

/// Runs body(i) for i in [0, n) on up to `threads` threads, in contiguous
/// chunks. The first exception thrown by any chunk is rethrown.
template <class Body>
void parallel_for(std::ptrdiff_t n, int threads, Body&& body) {
  if (threads <= 1 || n < 2 * threads) {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    const std::ptrdiff_t chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          const std::ptrdiff_t lo = w * chunk, hi = std::min(n, lo + chunk);
          for (std::ptrdiff_t i = lo; i < hi; ++i) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace aedg
