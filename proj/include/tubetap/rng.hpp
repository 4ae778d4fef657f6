#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace tubetap {

inline std::uint64_t mix64(std::uint64_t z) {
  // splitmix64 finalizer
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Combines a base seed with one or more stream tags into a new seed.
/// Used to give every task / round / grader its own independent stream
/// so results do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return mix64(base + 0x9e3779b97f4a7c15ULL * (tag + 1));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag1,
                                 std::uint64_t tag2) {
  return derive_seed(derive_seed(base, tag1), tag2);
}

/// Small deterministic PRNG (splitmix64 core). All simulation randomness
/// goes through this class; the standard <random> distributions are
/// avoided because their output is implementation-defined and the library
/// promises bit-identical runs for equal seeds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Standard normal via Box-Muller. Draws two uniforms per call and keeps
  /// no cached state, so call sequences stay reproducible.
  double normal(double mean, double stddev) {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform k-subset of `items`, preserving no particular order beyond the
  /// shuffle. k must be <= items.size().
  template <typename T>
  std::vector<T> sample_without_replacement(std::vector<T> items,
                                            std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + uniform_index(items.size() - i);
      std::swap(items[i], items[j]);
    }
    items.resize(k);
    return items;
  }

 private:
  std::uint64_t state_;
};

}  // namespace tubetap
