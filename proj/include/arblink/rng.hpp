#pragma once
// Counter-based deterministic random generation. A value depends only on
// (seed, stream, counter), never on call order, so parallel producers
// emit the same numbers as serial ones.

#include <cmath>
#include <cstdint>
#include <vector>

namespace arblink::rng {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t key(uint64_t seed, uint64_t stream, uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

// Uniform on (0, 1), never exactly 0 or 1.
inline double uniform01(uint64_t seed, uint64_t stream, uint64_t counter) {
  return (double(key(seed, stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller; consumes counters 2c and 2c+1.
inline double normal(uint64_t seed, uint64_t stream, uint64_t counter) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  double u1 = uniform01(seed, stream, 2 * counter);
  double u2 = uniform01(seed, stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Bounded draw without modulo bias worth worrying about at these sizes.
inline uint64_t below(uint64_t seed, uint64_t stream, uint64_t counter, uint64_t n) {
  return key(seed, stream, counter) % n;
}

// Fisher-Yates keyed by (seed, stream); independent of prior draws.
template <class T>
void shuffle(std::vector<T>& v, uint64_t seed, uint64_t stream) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = size_t(below(seed, stream, i, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace arblink::rng
