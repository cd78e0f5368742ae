#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "skewsim/rng.hpp"

namespace skewsim {

/// Runs fn(i) for i in [0, count) on `workers` threads and returns the results in index
/// order. The output does not depend on the worker count or the schedule.
template <typename Fn>
auto parallel_map(std::size_t count, unsigned workers, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> out(count);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Monte Carlo driver: path i draws from rng.child(i).
template <typename Fn>
auto monte_carlo(std::size_t paths, const RngStream& rng, unsigned workers, Fn&& fn) {
  return parallel_map(paths, workers, [&](std::size_t i) {
    RngStream local = rng.child(i);
    return fn(i, local);
  });
}

/// Pairwise summation; the result depends only on the order of the input.
double pairwise_sum(std::span<const double> xs);

struct MeanEstimate {
  double mean;
  double std_error;
  std::size_t count;
};

MeanEstimate mean_estimate(std::span<const double> xs);

}  // namespace skewsim
