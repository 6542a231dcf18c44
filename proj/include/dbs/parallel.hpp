// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace dbs {

/// Runs fn(t) for t in [0, n) on a small worker pool. Each trial must be
/// self-contained (derive its own rng stream, write its own output slot), so
/// results do not depend on the worker count. threads == 0 uses the hardware
/// concurrency, threads <= 1 runs inline.
template <typename Fn>
void parallel_trials(std::int64_t n, unsigned threads, Fn&& fn) {
  if (n <= 0) return;
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads > static_cast<unsigned>(n)) threads = static_cast<unsigned>(n);
  if (threads <= 1) {
    for (std::int64_t t = 0; t < n; ++t) fn(t);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::int64_t t = next.fetch_add(1);
        if (t >= n) break;
        fn(t);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace dbs
