// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_RNG_HPP
#define MADPFI_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace madpfi {

/// Deterministic RNG wrapper. std::uniform_int_distribution and
/// std::normal_distribution are implementation-defined, so the samplers
/// here are hand-rolled to guarantee identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, bound), bound > 0. Rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

  /// Uniform integer in [lo, hi] inclusive.
  long next_int(long lo, long hi) {
    return lo + static_cast<long>(
                    next_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Caches the second variate.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double next_normal(double mean, double sd) {
    return mean + sd * next_normal();
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Derives an independent child seed from a stream label. The mixer is
  /// splitmix64 so children with adjacent labels are decorrelated.
  static std::uint64_t derive_seed(std::uint64_t parent,
                                   std::uint64_t label) {
    std::uint64_t z = parent + 0x9e3779b97f4a7c15ull * (label + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Independent child stream; derivation depends only on the construction
  /// seed, not on how much of this stream has been consumed.
  Rng child(std::uint64_t label) const {
    return Rng(derive_seed(seed_, label));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace madpfi

#endif  // MADPFI_RNG_HPP
