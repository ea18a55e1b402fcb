#pragma once

#include <cmath>
#include <cstdint>

namespace blockcg {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over <random> engines because
// the uniform(0,1) mapping below is bit-reproducible across platforms, and the
// stream splits cheaply for independent substreams.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Derive an independent substream; advances this stream once.
  SplitMix64 split() { return SplitMix64(next() ^ 0x3c79ac492ba7b653ULL); }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (uses two uniforms per pair).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace blockcg
