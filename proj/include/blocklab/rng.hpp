#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace blocklab {

using Rng = std::mt19937_64;

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Splittable seed scheme "splitmix-v1": children are a pure function of
// (base, stream), so parallel workers can be seeded independently of
// execution order.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  uint64_t h = splitmix64(base + 0x6a09e667f3bcc909ull);
  return splitmix64(h ^ splitmix64(stream + 0xbb67ae8584caa73bull));
}

// Uniform in the open interval (0,1).
inline double uniform_double(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Unbiased draw from [0, n). Lemire's multiply-shift with rejection.
inline uint64_t uniform_index(Rng& rng, uint64_t n) {
  __uint128_t m = static_cast<__uint128_t>(rng()) * n;
  auto lo = static_cast<uint64_t>(m);
  if (lo < n) {
    uint64_t t = (0 - n) % n;
    while (lo < t) {
      m = static_cast<__uint128_t>(rng()) * n;
      lo = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

inline double sample_gumbel(Rng& rng) {
  return -std::log(-std::log(uniform_double(rng)));
}

}  // namespace blocklab
