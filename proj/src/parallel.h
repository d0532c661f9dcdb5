#ifndef ASPECTMINE_SRC_PARALLEL_H_
#define ASPECTMINE_SRC_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace aspectmine::internal {

// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `threads`
// threads. Each index is visited exactly once; results written per index are
// therefore independent of the thread count.
template <typename Fn>
void ParallelChunks(std::size_t n, int threads, Fn&& fn) {
  std::size_t workers =
      std::min<std::size_t>(threads < 1 ? 1 : static_cast<std::size_t>(threads), n);
  if (workers <= 1) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace aspectmine::internal

#endif  // ASPECTMINE_SRC_PARALLEL_H_
