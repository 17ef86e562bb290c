#pragma once

// Repo-wide deterministic random number generation. SplitMix64 is a
// counter-based generator (output = mix of an incrementing counter), so a
// stream is a pure function of its seed; replicate streams are derived
// from a base seed by fixed offsets.

#include <cmath>
#include <cstdint>

namespace hrsm {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u = uniform01();
    const double v = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 6.283185307179586476925286766559 * v;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double exponential() { return -std::log(uniform01()); }

  /// Standard Pareto with survival 1/r on [1, inf).
  double pareto() { return 1.0 / uniform01(); }

  std::uint64_t uniform_index(std::uint64_t bound) { return next_u64() % bound; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of the stream-th substream of base seed (fixed-offset derivation).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 mixer(seed ^ (0xd1342543de82ef95ULL * (stream + 1)));
  return mixer.next_u64();
}

}  // namespace hrsm
