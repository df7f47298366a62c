// include/abx/rng.hpp

// Copyright 2026  The abxeval Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ABX_RNG_HPP_
#define ABX_RNG_HPP_

// Counter-based keyed random generator. Every draw is a pure function of
// (key, counter), so randomized decisions are reproducible and independent
// of evaluation order and thread count. Fixed integer mixing (splitmix64,
// FNV-1a) keeps streams identical across platforms; std::hash is never used.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace abx::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Key {
  std::uint64_t state = 0;
};

inline Key key(std::uint64_t seed) { return Key{splitmix64(seed)}; }

inline Key chain(Key k, std::uint64_t word) {
  return Key{splitmix64(k.state ^ splitmix64(word))};
}

inline Key chain(Key k, std::string_view word) {
  return chain(k, fnv1a64(word));
}

// The counter-indexed draw underlying everything else.
inline std::uint64_t at(Key k, std::uint64_t counter) {
  return splitmix64(k.state ^ (counter * 0xd1342543de82ef95ULL + 1));
}

// Uniform in [0, 1), 53 mantissa bits.
inline double uniform01(Key k, std::uint64_t counter) {
  return static_cast<double>(at(k, counter) >> 11) * 0x1.0p-53;
}

// Uniform in [0, n) without modulo bias.
inline std::uint64_t bounded(Key k, std::uint64_t counter, std::uint64_t n) {
  Key sub = chain(k, counter);
  const std::uint64_t reject_below = (0ULL - n) % n;  // 2^64 mod n
  for (std::uint64_t j = 0;; ++j) {
    std::uint64_t v = at(sub, j);
    if (v >= reject_below) return v % n;
  }
}

// Standard normal via Box-Muller; one value per counter.
inline double gaussian(Key k, std::uint64_t counter) {
  Key sub = chain(k, counter);
  // Shift into (0, 1] so the log stays finite.
  double u1 =
      (static_cast<double>(at(sub, 0) >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(at(sub, 1) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace abx::rng

#endif  // ABX_RNG_HPP_
