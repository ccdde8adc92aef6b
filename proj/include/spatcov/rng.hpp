#pragma once

// Portable seeded randomness for simulation: xoshiro256++ seeded through
// splitmix64, uniforms by 53-bit mantissa extraction, normals by the
// basic Box-Muller transform.  Every step is fully specified so that a
// given seed yields bit-identical realizations on any platform.

#include <cmath>
#include <cstdint>

namespace spatcov {

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    // splitmix64 expansion of the seed into the four state words
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// uniform on [0, 1) with 53 random bits
  double uniform() { return (next() >> 11) * 0x1.0p-53; }

  /// standard normal via Box-Muller; draws are consumed in pairs
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace spatcov
