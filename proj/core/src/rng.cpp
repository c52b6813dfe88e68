#include "finer/rng.hpp"

#include <cmath>
#include <numbers>

#include "finer/errors.hpp"

namespace finer {
namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
__extension__ using u128 = unsigned __int128;
}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), key_(mix(seed + kGolden) ^ mix(stream * kGolden + 0x632BE59BD9B4E019ULL)) {}

CounterRng CounterRng::split(std::uint64_t stream) const {
  CounterRng child(seed_, 0);
  child.key_ = mix(key_ ^ mix(stream + 0xD1B54A32D192ED03ULL));
  return child;
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
  const double u = uniform();
  if (lo == hi) return lo;
  return lo + (hi - lo) * u;
}

double CounterRng::normal() {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t CounterRng::index(std::size_t n) {
  FINER_REQUIRE(n > 0, "CounterRng::index: empty range");
  // Lemire's multiply-shift with rejection; unbiased.
  const std::uint64_t range = n;
  std::uint64_t x = next_u64();
  u128 m = static_cast<u128>(x) * range;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<u128>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

}  // namespace finer
