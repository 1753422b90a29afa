#pragma once

#include <cmath>
#include <cstdint>

namespace ssp {

/// Counter-based pseudo-random generator (splitmix64). The k-th output is a
/// fixed hash of seed + k*gamma, so the full state serializes as the pair
/// (seed, draws) and any stream can be replayed from a trace record.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), draws_(0) {}

  Rng(std::uint64_t seed, std::uint64_t draws) : seed_(seed), draws_(draws) {}

  std::uint64_t next_u64() {
    ++draws_;
    std::uint64_t z = seed_ + draws_ * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. Consumes exactly two uniforms.
  double next_gaussian() {
    double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t seed_;
  std::uint64_t draws_;
};

}  // namespace ssp
