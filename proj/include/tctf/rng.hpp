#pragma once

#include <cmath>
#include <cstdint>

namespace tctf {

// Deterministic splitmix64 generator with a Box-Muller Gaussian layer.
// Self-contained so that seeded runs reproduce bit-for-bit across
// standard-library versions and thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent substream: distinct (seed, stream) pairs decorrelate the
  // mask draw from the factor initialization.
  Rng(std::uint64_t seed, std::uint64_t stream) : state_(seed) {
    state_ = next_u64() ^ (stream * 0xd1342543de82ef95ULL);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; caches the second draw of each pair.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_unit();  // (0, 1]
    double u2 = next_unit();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tctf
