#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace expdyn {

// Runs fn(i) for i in [0, n) across threads. Work items must be
// independent and write only to their own slot; assignment is strided so
// expensive neighbouring samples spread out. Results are identical for any
// thread count.
template <class F>
void parallel_for(std::int64_t n, F&& fn, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (n <= 0) return;
  if (threads == 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::int64_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace expdyn
