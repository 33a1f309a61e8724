#pragma once

// Deterministic random number utilities. Everything randomized in the
// toolkit draws from these so that a (seed, input) pair produces identical
// output on every platform; std::shuffle and the standard distributions are
// implementation-defined and would break that.

#include <cstdint>
#include <string_view>

namespace histner {

/// SplitMix64 finalizer; bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed + 0x9E3779B97F4A7C15ULL * (value + 1));
}

/// Stage seeds are derived from the single global seed and the stage name,
/// so one --seed flag reproduces a whole pipeline run.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a over the stage name
  for (char c : stage) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return mix64(seed ^ h);
}

/// SplitMix64 stream (Steele et al.). Small state, deterministic, fast.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool next_bool(double p) { return next_double() < p; }

  /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t v = next();
    while (v > limit) v = next();
    return v % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace histner
