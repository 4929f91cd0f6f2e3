#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace povm {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work is
/// strided by index; callers store results per index so that reduction order
/// never depends on scheduling. The first exception thrown is rethrown.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  const std::size_t n_threads = std::clamp<std::size_t>(workers < 1 ? 1 : workers, 1, std::max<std::size_t>(count, 1));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += n_threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace povm
