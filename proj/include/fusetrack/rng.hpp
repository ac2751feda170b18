#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fusetrack {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seedable random stream with a portable output sequence: mt19937_64 is fully specified
/// by the standard, and the uniform/normal transforms below avoid the
/// implementation-defined std distributions.
class RandomStream {
 public:
  /// Independent stream `stream_id` derived from a run seed.
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : engine_(splitmix64(seed ^ splitmix64(stream_id + 0x5851F42D4C957F2DULL))) {}

  /// Uniform in (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fusetrack
