#pragma once

#include <cstdint>
#include <cmath>

namespace sk {

/// Counter-based generator: the splitmix64 finalizer applied to a Weyl
/// sequence, giving O(1) random access to the k-th output of a seeded stream.
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform in (0,1] from 53 high bits (never 0, so log is safe).
inline double uniform_pos(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Uniform in [0,1).
inline double uniform_half_open(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// k-th standard normal of the stream (Box–Muller, cosine branch, counters
/// 2k and 2k+1), reproducible independently of evaluation order.
inline double normal_at(std::uint64_t seed, std::uint64_t k) {
  const double u1 = uniform_pos(mix64(seed, 2 * k));
  const double u2 = uniform_half_open(mix64(seed, 2 * k + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace sk
