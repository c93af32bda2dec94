#pragma once

#include <cstdint>

namespace oi {

/// Counter-based generator: value = mix(key(seed, stream) + counter * gamma).
///
/// A (seed, stream) pair identifies an independent stream; `counter` is the
/// position inside it, so any draw can be reproduced without replaying the
/// stream and parallel trials never share state.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t counter = 0) noexcept
      : seed_(seed), stream_(stream), key_(derive_key(seed, stream)), counter_(counter) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() noexcept { return at(counter_++); }

  /// Value at an absolute counter position; does not advance.
  std::uint64_t at(std::uint64_t counter) const noexcept { return mix(key_ + (counter + 1) * kGamma); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Independent child stream. Children of distinct ids never collide with
  /// each other or with the parent in practice (64-bit mixing).
  CounterRng split(std::uint64_t id) const noexcept { return CounterRng(seed_, mix(stream_ ^ mix(id + kGamma))); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_;
};

inline std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace oi
