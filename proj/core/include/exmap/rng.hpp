#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace exmap {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to mix seed components.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic per-replication seed stream: any (setting, n, rep) cell of a
// run can be reproduced in isolation from the base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t n, std::uint64_t rep) {
  std::uint64_t h = splitmix64(base);
  for (char c : tag) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  h = splitmix64(h ^ n);
  h = splitmix64(h ^ rep);
  return h;
}

// Uniform on [0, 1) with 53 random bits. Hand-rolled so draws do not depend
// on the standard library's distribution implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Standard normal via Box-Muller. One value per call; the paired draw is
// discarded to keep call sites stateless.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace exmap
