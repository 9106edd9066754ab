// Copyright 2026 The zospsa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Counter-based random streams.
//
// Every variate is a pure function of (seed, stream, counter): there is no
// hidden generator state, so any draw can be regenerated on demand and
// disjoint streams can be consumed concurrently. Bits come from two rounds
// of the SplitMix64 finalizer; uniforms use the top 53 bits shifted into
// (0, 1); normals use the Box-Muller transform on the uniform pair at
// counters (2m, 2m+1), the cosine branch for even counters and the sine
// branch for odd ones.

#ifndef ZOSPSA_RNG_HPP_
#define ZOSPSA_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace zospsa {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Purpose tags keep streams used for different jobs disjoint.
enum class StreamTag : std::uint64_t {
  kPerturbation = 1,
  kBatch = 2,
  kSampling = 3,
  kInstance = 4,
  kAnchor = 5,
};

/// Derives a stream id from a tag and up to two integer coordinates
/// (typically iteration and sample index).
inline constexpr std::uint64_t stream_id(StreamTag tag, std::uint64_t a = 0,
                                         std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b * 0xD1B54A32D192ED03ull));
  return h;
}

class CounterRng {
 public:
  constexpr CounterRng() = default;
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t seed() const { return seed_; }

  constexpr std::uint64_t bits(std::uint64_t stream,
                               std::uint64_t counter) const {
    const std::uint64_t key = splitmix64(seed_ ^ splitmix64(stream));
    return splitmix64(key + counter * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) *
           0x1.0p-53;
  }

  double normal(std::uint64_t stream, std::uint64_t counter) const {
    const std::uint64_t base = counter & ~std::uint64_t{1};
    const double u1 = uniform(stream, base);
    const double u2 = uniform(stream, base + 1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (counter & 1u) ? radius * std::sin(angle) : radius * std::cos(angle);
  }

  /// Uniform integer in [0, bound) by 128-bit multiply-high.
  std::uint64_t below(std::uint64_t stream, std::uint64_t counter,
                      std::uint64_t bound) const {
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(bits(stream, counter)) * bound;
    return static_cast<std::uint64_t>(prod >> 64);
  }

 private:
  std::uint64_t seed_ = 0;
};

}  // namespace zospsa

#endif  // ZOSPSA_RNG_HPP_
