#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace driftfuzz {

/// SplitMix64 output finalizer (Steele, Lea & Flood). Bijective on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based 64-bit engine: the n-th draw is mix64(key + n * golden).
/// Satisfies UniformRandomBitGenerator, so std distributions can consume it.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterEngine(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGolden); }
  constexpr void discard(std::uint64_t n) noexcept { counter_ += n; }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// A seed value. Randomness is never shared: operations take a RandomSource
/// by value, build a local engine from it, and derive child sources by key
/// for independent sub-streams. Same seed and algorithm, same draws.
class RandomSource {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64-counter/v1";

  constexpr RandomSource() noexcept = default;
  constexpr explicit RandomSource(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::string_view algorithm() const noexcept { return kAlgorithm; }

  constexpr RandomSource derive(std::uint64_t key) const noexcept {
    return RandomSource(mix64(seed_ ^ mix64(key + 0x632be59bd9b4e019ULL)));
  }

  constexpr RandomSource derive(std::initializer_list<std::uint64_t> keys) const noexcept {
    RandomSource out = *this;
    for (auto k : keys) out = out.derive(k);
    return out;
  }

  constexpr CounterEngine engine() const noexcept { return CounterEngine(mix64(seed_)); }

  friend constexpr bool operator==(const RandomSource&, const RandomSource&) = default;

 private:
  std::uint64_t seed_ = 0;
};

}  // namespace driftfuzz
