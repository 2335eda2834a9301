#include "sphtomo/threads.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace sphtomo {

namespace {
std::atomic<unsigned> g_limit{0};
}

void set_thread_limit(unsigned n) noexcept { g_limit.store(n, std::memory_order_relaxed); }

unsigned thread_limit() noexcept {
  const unsigned n = g_limit.load(std::memory_order_relaxed);
  return n > 0 ? n : std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace sphtomo
