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

#ifndef ZOSPSA_SAMPLING_HPP_
#define ZOSPSA_SAMPLING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "zospsa/errors.hpp"
#include "zospsa/linalg.hpp"
#include "zospsa/rng.hpp"

namespace zospsa {

/// Uniform size-`size` subset of [0, n) drawn without replacement (partial
/// Fisher-Yates), returned sorted. Deterministic in (rng seed, draw).
inline std::vector<std::size_t> sample_batch(const CounterRng& rng,
                                             std::uint64_t draw, std::size_t n,
                                             std::size_t size) {
  if (size == 0 || size > n) {
    throw InputError("batch size " + std::to_string(size) +
                     " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (size < n) {
    const auto stream = stream_id(StreamTag::kBatch, draw);
    for (std::size_t i = 0; i < size; ++i) {
      const auto pick = i + rng.below(stream, i, n - i);
      std::swap(idx[i], idx[pick]);
    }
    idx.resize(size);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Vector gaussian_vector(const CounterRng& rng, std::uint64_t stream,
                              std::size_t dim) {
  Vector z(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    z(static_cast<Eigen::Index>(i)) = rng.normal(stream, i);
  }
  return z;
}

/// Uniform draw from the closed ball ||x||_2 <= radius.
inline Vector sample_in_ball(const CounterRng& rng, std::uint64_t stream,
                             std::size_t dim, double radius) {
  Vector z = gaussian_vector(rng, stream, dim);
  const double norm = z.norm();
  const double u = rng.uniform(stream, dim + 1);
  const double r = radius * std::pow(u, 1.0 / static_cast<double>(dim));
  return norm > 0.0 ? Vector(z * (r / norm)) : Vector(z);
}

}  // namespace zospsa

#endif  // ZOSPSA_SAMPLING_HPP_
