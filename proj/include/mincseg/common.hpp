#pragma once

#include <cmath>
#include <cstdint>

namespace mincseg {

// Round-half-up. The one rounding rule used wherever a fractional pixel
// count becomes an integer (crop sides, scale planning, resize targets).
inline int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

inline int clamp_int(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// SplitMix64 step; derives independent sub-seeds from one top-level seed so
// per-item work stays deterministic under any processing order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace mincseg
