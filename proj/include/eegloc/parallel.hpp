#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace eegloc {

/// Resolves a worker count: 0 means one per hardware thread.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Splits [0, n) into contiguous chunks, one per worker, and calls
/// fn(begin, end, worker) on each. The first exception thrown is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const int w = std::max(1, std::min<int>(resolve_workers(workers),
                                          static_cast<int>(std::max<std::size_t>(n, 1))));
  if (w == 1) {
    fn(std::size_t{0}, n, 0);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(w);
  threads.reserve(w);
  const std::size_t chunk = (n + w - 1) / w;
  for (int t = 0; t < w; ++t) {
    const std::size_t begin = std::min(n, chunk * t);
    const std::size_t end = std::min(n, begin + chunk);
    threads.emplace_back([&, begin, end, t] {
      try {
        fn(begin, end, t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace eegloc
