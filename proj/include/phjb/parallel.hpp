#pragma once

// Static-chunk parallel loops. Chunk boundaries depend only on the range and
// the worker count, and every index is written by exactly one worker, so
// callers that write disjoint outputs get results independent of threading.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace phjb {

/// Resolves a requested worker count: 0 means PHJB_THREADS if set, else the
/// hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PHJB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return unsigned(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(begin, end) over [0, n) split into at most `threads` contiguous
/// chunks. The first exception thrown by any chunk is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers == 1) {
    fn(std::size_t(0), n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = n / workers, extra = n % workers;
  auto bounds = [&](std::size_t w) {
    const std::size_t b = w * chunk + std::min(w, extra);
    return std::pair{b, b + chunk + (w < extra ? 1 : 0)};
  };
  for (std::size_t w = 1; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        auto [b, e] = bounds(w);
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  try {
    auto [b, e] = bounds(0);
    fn(b, e);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace phjb
