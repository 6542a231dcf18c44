// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace dbs {

/// Counter-based random source (splitmix64 core). A generator is identified by
/// an immutable key; `fork(salt)` derives an independent stream from
/// (key, salt) regardless of how much the parent has been consumed, so
/// per-trial / per-node streams are reproducible and order-independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed), state_(mix(seed ^ kStateSalt)) {}

  /// Independent child stream keyed by (this->key, salt).
  [[nodiscard]] Rng fork(std::uint64_t salt) const {
    return Rng(mix(key_ ^ mix(salt ^ kForkSalt)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Standard normal N(0, 1), Box-Muller.
  double gaussian() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Circularly symmetric complex Gaussian CN(0, 1): E[|z|^2] = 1.
  std::complex<double> cgaussian() {
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
  }

  [[nodiscard]] std::uint64_t key() const { return key_; }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  static constexpr std::uint64_t kStateSalt = 0x6A09E667F3BCC909ull;
  static constexpr std::uint64_t kForkSalt = 0xBB67AE8584CAA73Bull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t state_;
};

}  // namespace dbs
