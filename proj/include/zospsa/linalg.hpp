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

#ifndef ZOSPSA_LINALG_HPP_
#define ZOSPSA_LINALG_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace zospsa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Singular values in descending order.
inline Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline double spectral_norm(const Matrix& m) {
  const Vector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

/// Smallest singular value over min(rows, cols) values; zero for a matrix
/// with fewer rows than columns.
inline double sigma_min(const Matrix& m) {
  if (m.rows() < m.cols()) return 0.0;
  const Vector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

/// Condition number sigma_max/sigma_min; infinity for rank-deficient input.
inline double condition_number(const Matrix& m) {
  const double lo = sigma_min(m);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return spectral_norm(m) / lo;
}

/// Count of singular values strictly above rel_tol * sigma_max.
inline int numerical_rank(const Matrix& m, double rel_tol = 1e-8) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = rel_tol * s(0);
  return static_cast<int>((s.array() > cut).count());
}

/// Eigenvalues of the symmetric part of m, ascending.
inline Vector sym_eigenvalues(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const Matrix& m) { return sym_eigenvalues(m)(0); }

inline double max_eigenvalue(const Matrix& m) {
  const Vector ev = sym_eigenvalues(m);
  return ev(ev.size() - 1);
}

/// Largest absolute eigenvalue of a symmetric matrix.
inline double sym_spectral_norm(const Matrix& m) {
  const Vector ev = sym_eigenvalues(m);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

}  // namespace zospsa

#endif  // ZOSPSA_LINALG_HPP_
