#pragma once

#include <cstddef>
#include <cstdint>

namespace finer {

/// SplitMix64 run in counter mode: draw i of stream s is a pure function of
/// (seed, s, i). Independent streams come from split(), so adding consumers
/// of one stream never shifts the draws of another.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  /// A fresh generator for a named sub-stream (layer index, task role, ...).
  CounterRng split(std::uint64_t stream) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi); returns lo exactly when lo == hi.
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (two draws per value, no caching).
  double normal();
  /// Uniform integer on [0, n), n > 0.
  std::size_t index(std::size_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static std::uint64_t mix(std::uint64_t z) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace finer
