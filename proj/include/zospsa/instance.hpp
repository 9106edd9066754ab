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

#ifndef ZOSPSA_INSTANCE_HPP_
#define ZOSPSA_INSTANCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "zospsa/diagnostics.hpp"
#include "zospsa/errors.hpp"
#include "zospsa/linalg.hpp"
#include "zospsa/model.hpp"
#include "zospsa/rng.hpp"

namespace zospsa {

struct GeneratorParams {
  std::size_t n_blocks = 4;
  std::size_t n_rows = 6;
  std::size_t dim = 4;
  double radius = 4.0;
  double mu_target = 0.1;
  std::uint64_t seed = 0;
  // Targets are drawn on the simplex and scaled by a factor in
  // [b_scale_min, 1].
  double b_scale_min = 0.5;

  void validate() const {
    if (n_blocks < 1 || n_rows < 1 || dim < 1) {
      throw ConfigError("generator sizes must be positive");
    }
    if (!(radius > 0.0)) throw ConfigError("generator radius must be positive");
    if (!(mu_target >= 0.0)) throw ConfigError("mu_target must be >= 0");
    if (!(b_scale_min > 0.0 && b_scale_min <= 1.0)) {
      throw ConfigError("b_scale_min must lie in (0, 1]");
    }
  }
};

/// Random instance satisfying the convergence hypotheses:
///   A_j = R G_j / ||G_j|| for Gaussian G_j, so ||A_j|| = R;
///   b_j = s * (normalized exponentials), s in [b_scale_min, 1];
///   w_i^2 = max(mu/s_min, mu/lambda_min(sum_j A_j^T A_j)) + nu for every i,
///   where s_min is the smallest sigma_min(A_j) and nu the exp-part
///   curvature bound, so that min w^2 sigma_min(A_j) >= mu and the
///   certified convexity is at least mu.
/// With mu_target = 0 the regularizer is switched off (w = 0).
inline SoftmaxProblem generate_instance(const GeneratorParams& g) {
  g.validate();
  const CounterRng rng(g.seed);
  const auto rows = static_cast<Eigen::Index>(g.n_rows);
  const auto cols = static_cast<Eigen::Index>(g.dim);

  std::vector<DataBlock> blocks;
  blocks.reserve(g.n_blocks);
  double s_min = kInf;
  for (std::size_t j = 0; j < g.n_blocks; ++j) {
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
      const auto stream = stream_id(StreamTag::kInstance, j,
                                    static_cast<std::uint64_t>(attempt));
      Matrix G(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          G(r, c) = rng.normal(stream, static_cast<std::uint64_t>(r * cols + c));
        }
      }
      const Vector s = singular_values(G);
      const double smin = rows >= cols ? s(s.size() - 1) : 0.0;
      if (!(smin > 1e-12 * s(0))) continue;
      Matrix A = G * (g.radius / s(0));

      const auto bstream = stream_id(StreamTag::kInstance, j, 1000 + attempt);
      Vector b(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        b(r) = -std::log(rng.uniform(bstream, static_cast<std::uint64_t>(r)));
      }
      const double scale =
          g.b_scale_min +
          (1.0 - g.b_scale_min) *
              rng.uniform(bstream, static_cast<std::uint64_t>(rows));
      b *= scale / b.sum();

      s_min = std::min(s_min, smin * g.radius / s(0));
      blocks.push_back({std::move(A), std::move(b)});
      ok = true;
    }
    if (!ok) {
      throw ConfigError("could not draw a full-rank block after 10 attempts "
                        "(n_rows must be >= dim)");
    }
  }

  Vector w = Vector::Zero(rows);
  if (g.mu_target > 0.0) {
    Matrix AtA = Matrix::Zero(cols, cols);
    for (const auto& blk : blocks) AtA += blk.A.transpose() * blk.A;
    const double w2 = std::max(g.mu_target / s_min,
                               g.mu_target / min_eigenvalue(AtA)) +
                      kExpCurvatureBound;
    w.setConstant(std::sqrt(w2));
  }
  return SoftmaxProblem(std::move(blocks), std::move(w), g.radius);
}

}  // namespace zospsa

#endif  // ZOSPSA_INSTANCE_HPP_
