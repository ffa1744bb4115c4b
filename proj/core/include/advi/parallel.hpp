#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace advi {

/**
 * Runs fn(i) for every i in [0, n), split into contiguous index blocks, one
 * per worker thread.  fn must touch only per-index state, so the result is
 * identical for every thread count.  If any calls throw, the exception at the
 * smallest failing index is rethrown (earlier indices in its block cannot
 * have failed, since blocks run in ascending order) — the same exception the
 * plain serial loop would surface.
 */
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace advi
