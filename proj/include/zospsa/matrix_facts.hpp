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


// Randomized checks of elementary norm, rank and PSD inequalities that the
// convergence analysis leans on. Each check reports the two sides so a
// failure can be inspected rather than just counted.

#ifndef ZOSPSA_MATRIX_FACTS_HPP_
#define ZOSPSA_MATRIX_FACTS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "zospsa/linalg.hpp"
#include "zospsa/rng.hpp"

namespace zospsa {

struct FactCheck {
  std::string name;
  double lhs = 0.0;  // for PSD facts: 0
  double rhs = 0.0;  // for PSD facts: lambda_min(rhs - lhs)
  bool holds = false;
};

namespace detail {

inline Matrix random_matrix(const CounterRng& rng, std::uint64_t stream,
                            Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = rng.normal(stream, static_cast<std::uint64_t>(i * cols + j));
    }
  }
  return m;
}

inline Matrix low_rank_matrix(const CounterRng& rng, std::uint64_t stream,
                              Eigen::Index rows, Eigen::Index cols,
                              Eigen::Index rank) {
  return random_matrix(rng, stream, rows, rank) *
         random_matrix(rng, stream + 1, rank, cols);
}

inline FactCheck scalar_fact(std::string name, double lhs, double rhs) {
  const double slack = 1e-10 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return {std::move(name), lhs, rhs, lhs <= rhs + slack};
}

inline FactCheck psd_fact(std::string name, const Matrix& lhs,
                          const Matrix& rhs) {
  const double m = min_eigenvalue(rhs - lhs);
  return {std::move(name), 0.0, m, m >= -1e-10};
}

}  // namespace detail

/// One randomized round of every fact on matrices of shape rows x cols.
/// Draws are a pure function of (seed, round).
inline std::vector<FactCheck> matrix_fact_round(std::uint64_t seed,
                                                std::uint64_t round,
                                                Eigen::Index rows = 5,
                                                Eigen::Index cols = 4) {
  using detail::psd_fact;
  using detail::scalar_fact;
  const CounterRng rng(seed);
  auto stream = [&](std::uint64_t k) {
    return stream_id(StreamTag::kSampling, 0xFAC7 + round, k);
  };
  const Eigen::Index r = 1 + static_cast<Eigen::Index>(
                                 rng.below(stream(0), 0,
                                           static_cast<std::uint64_t>(
                                               std::min(rows, cols))));
  const Matrix A = detail::low_rank_matrix(rng, stream(1), rows, cols, r);
  const Matrix B = detail::random_matrix(rng, stream(3), rows, cols);
  const Matrix C = detail::random_matrix(rng, stream(4), cols, rows);
  const Vector x = detail::random_matrix(rng, stream(5), cols, 1);
  const Vector y = detail::random_matrix(rng, stream(6), cols, 1);
  const double a = 4.0 * (rng.uniform(stream(7), 0) - 0.5);

  std::vector<FactCheck> out;
  const double nA = spectral_norm(A);
  const double nB = spectral_norm(B);

  out.push_back(scalar_fact("frobenius_vs_rank",
                            A.norm(),
                            std::sqrt(static_cast<double>(numerical_rank(A))) * nA));
  out.push_back(scalar_fact(
      "rank_subadditive", static_cast<double>(numerical_rank(A + B)),
      static_cast<double>(numerical_rank(A) + numerical_rank(B))));
  {
    const double t = spectral_norm(A.transpose());
    out.push_back({"transpose_norm", t, nA,
                   std::abs(t - nA) <= 1e-10 * std::max(1.0, nA)});
  }
  out.push_back(scalar_fact("reverse_triangle", nB - spectral_norm(A - B), nA));
  out.push_back(scalar_fact("triangle", spectral_norm(A + B), nA + nB));
  out.push_back(scalar_fact("submultiplicative", spectral_norm(A * C),
                            nA * spectral_norm(C)));
  {
    // P <= c Q for PSD P, Q with c = lambda_max(Q^{-1/2} P Q^{-1/2}).
    const Matrix P = A.transpose() * A;
    const Matrix Q = B.transpose() * B + Matrix::Identity(cols, cols);
    Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
    const Matrix Qih = es.operatorInverseSqrt();
    const double c = max_eigenvalue(Qih * P * Qih) * (1.0 + 1e-12);
    out.push_back(scalar_fact("loewner_norm", sym_spectral_norm(P),
                              c * sym_spectral_norm(Q)));
  }
  out.push_back(scalar_fact("scalar_norm", spectral_norm(a * A),
                            std::abs(a) * nA));
  out.push_back(scalar_fact("operator_norm", (A * x).norm(), nA * x.norm()));
  out.push_back(scalar_fact("outer_product_norm",
                            spectral_norm(x * y.transpose()),
                            x.norm() * y.norm()));

  out.push_back(psd_fact("symmetric_outer",
                         x * y.transpose() + y * x.transpose(),
                         x * x.transpose() + y * y.transpose()));

  const Matrix V = detail::random_matrix(rng, stream(8), cols, rows);
  const auto n = V.cols();
  const Matrix diag_sum = V * V.transpose();
  {
    const auto u = V.col(0), v = V.col(n - 1);
    out.push_back(psd_fact("pair_domination",
                           u * v.transpose() + v * u.transpose(),
                           u * u.transpose() + v * v.transpose()));
  }
  {
    Matrix cross = Matrix::Zero(cols, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        cross += V.col(i) * V.col(j).transpose() +
                 V.col(j) * V.col(i).transpose();
      }
    }
    out.push_back(psd_fact("cross_sum_domination", cross,
                           static_cast<double>(n - 1) * diag_sum));
  }
  {
    const Vector s = V.rowwise().sum();
    out.push_back(psd_fact("full_sum_domination", s * s.transpose(),
                           static_cast<double>(n) * diag_sum));
  }
  return out;
}

}  // namespace zospsa

#endif  // ZOSPSA_MATRIX_FACTS_HPP_
