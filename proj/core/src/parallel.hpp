#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "sphtomo/threads.hpp"

namespace sphtomo::detail {

/// Runs body(i) for i in [0, n) on up to thread_limit() threads.
/// Work items must write to disjoint outputs; any exception is rethrown.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t threads = std::min<std::size_t>(n, thread_limit());
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  [[nodiscard]] double value() const noexcept { return sum + carry; }
};

}  // namespace sphtomo::detail
