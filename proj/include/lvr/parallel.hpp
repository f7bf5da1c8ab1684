#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lvr {

/// Runs fn(block) for block = 0..n_blocks-1 on up to `workers` threads and
/// returns the results in block order. Work is split by block, not by
/// worker, so any seeding derived from the block index makes the result
/// independent of the worker count.
template <typename Fn>
auto parallel_blocks(std::size_t n_blocks, int workers, Fn&& fn) {
  using Result = decltype(fn(std::size_t{0}));
  std::vector<Result> results(n_blocks);
  const std::size_t n_threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n_blocks, 1));
  if (n_threads == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) results[b] = fn(b);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < n_blocks; b = next++) {
        try {
          results[b] = fn(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace lvr
