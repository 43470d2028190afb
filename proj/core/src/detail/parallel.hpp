#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace statphase::detail {

// Splits [0, n) into `chunks` contiguous ranges and runs fn(chunk, begin, end) on up to `threads`
// workers. Chunk boundaries depend only on n and chunks, so per-chunk partial results reduced in
// chunk order are identical for any thread count.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunks, int threads, Fn&& fn) {
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  auto range = [&](std::size_t c) { return std::pair{n * c / chunks, n * (c + 1) / chunks}; };
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [b, e] = range(c);
      fn(c, b, e);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, chunks); ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) {
        try {
          auto [b, e] = range(c);
          fn(c, b, e);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline constexpr std::size_t kDefaultChunks = 64;

}  // namespace statphase::detail
