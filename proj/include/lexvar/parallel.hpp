#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lexvar {

/// Worker count: LEXVAR_THREADS if set and positive, else hardware concurrency.
inline unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LEXVAR_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return std::min<unsigned>(static_cast<unsigned>(v), hw);
  }
  return hw;
}

/// Runs fn(i) for i in [0, n). Work items are claimed dynamically, so callers
/// that need reproducible floating-point results must make fn(i) write only
/// to slot i and reduce the slots afterwards in index order.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Splits [0, n) into fixed-size blocks independent of the thread count.
struct BlockRange {
  std::size_t begin;
  std::size_t end;
};

inline std::vector<BlockRange> fixed_blocks(std::size_t n, std::size_t block = 128) {
  std::vector<BlockRange> out;
  for (std::size_t b = 0; b < n; b += block) out.push_back({b, std::min(n, b + block)});
  return out;
}

}  // namespace lexvar
