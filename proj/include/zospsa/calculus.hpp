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

// Analytic first and second derivatives of the softmax loss, plus central
// finite-difference oracles used to cross-check them.
//
// With f = f_j(x), c = f - b_j and u = A_j x, the gradient of L_exp,j is
// A_j^T G_j where G_j = -f (c^T f) + diag(f) c. The Hessian with respect to
// u is
//
//   B_j = <3f - 2b, f> f f^T - q f^T - f q^T - <f - b, f> diag(f) + diag(q)
//
// with q = (2f - b) o f, so that the Hessian in x is A_j^T B_j A_j. The
// first three terms have rank one each; the last two are diagonal.

#ifndef ZOSPSA_CALCULUS_HPP_
#define ZOSPSA_CALCULUS_HPP_

#include <array>
#include <cstddef>
#include <span>

#include "zospsa/errors.hpp"
#include "zospsa/linalg.hpp"
#include "zospsa/model.hpp"

namespace zospsa {

struct GradientParts {
  Vector g1;  // f (c^T f)
  Vector g2;  // f o c
  Vector g;   // -g1 + g2
};

inline GradientParts gradient_parts(const Vector& f, const Vector& b) {
  const Vector c = f - b;
  GradientParts parts;
  parts.g1 = f * c.dot(f);
  parts.g2 = f.cwiseProduct(c);
  parts.g = -parts.g1 + parts.g2;
  return parts;
}

inline GradientParts grad_parts_block(const SoftmaxProblem& p, std::size_t j,
                                      const Vector& x) {
  return gradient_parts(softmax_block(p, j, x).f, p.block(j).b);
}

/// Gradient of L_exp,j: A_j^T G_j(x).
inline Vector grad_exp_block(const SoftmaxProblem& p, std::size_t j,
                             const Vector& x) {
  return p.block(j).A.transpose() * grad_parts_block(p, j, x).g;
}

/// Gradient of L_reg,j: A_j^T W^2 A_j x.
inline Vector grad_reg_block(const SoftmaxProblem& p, std::size_t j,
                             const Vector& x) {
  require_finite(x, p.dim());
  const auto& A = p.block(j).A;
  const Vector w2 = p.reg_weights().array().square().matrix();
  return A.transpose() * w2.cwiseProduct(A * x);
}

/// Gradient of the batched loss, matching loss_total's regularizer
/// convention.
inline Vector grad_total(const SoftmaxProblem& p, const Vector& x,
                         std::span<const std::size_t> batch,
                         LossOptions opts = {}) {
  check_batch(p, batch);
  require_finite(x, p.dim());
  ++eval_counters().grad_evals;
  const Vector w2 = p.reg_weights().array().square().matrix();
  Vector g = Vector::Zero(static_cast<Eigen::Index>(p.dim()));
  for (auto j : batch) {
    const auto& blk = p.block(j);
    const Vector u = blk.A * x;
    Vector per_row = gradient_parts(softmax(u).f, blk.b).g;
    if (opts.reg_in_batch) per_row += w2.cwiseProduct(u);
    g += blk.A.transpose() * per_row;
  }
  return g;
}

inline Vector grad_total(const SoftmaxProblem& p, const Vector& x) {
  const auto all = full_batch(p);
  return grad_total(p, x, all, LossOptions{true});
}

/// Per-block gradient of L_exp,j + L_reg,j, one column per block.
inline Matrix per_block_gradients(const SoftmaxProblem& p, const Vector& x) {
  Matrix cols(static_cast<Eigen::Index>(p.dim()),
              static_cast<Eigen::Index>(p.n_blocks()));
  for (std::size_t j = 0; j < p.n_blocks(); ++j) {
    cols.col(static_cast<Eigen::Index>(j)) =
        grad_exp_block(p, j, x) + grad_reg_block(p, j, x);
  }
  return cols;
}

struct HessianBlock {
  Matrix B;
  // outer:       <3f - 2b, f> f f^T
  // cross_left:  -q f^T
  // cross_right: -f q^T
  // diag_scaled: -<f - b, f> diag(f)
  // diag_q:      diag(q)
  std::array<Matrix, 5> parts;

  Matrix rank_part() const { return parts[0] + parts[1] + parts[2]; }
  Matrix diag_part() const { return parts[3] + parts[4]; }
};

inline HessianBlock hessian_from_softmax(const Vector& f, const Vector& b) {
  const Vector q = (2.0 * f - b).cwiseProduct(f);
  HessianBlock h;
  h.parts[0] = (3.0 * f - 2.0 * b).dot(f) * (f * f.transpose());
  h.parts[1] = -q * f.transpose();
  h.parts[2] = -f * q.transpose();
  h.parts[3] = Matrix(-(f - b).dot(f) * f.asDiagonal());
  h.parts[4] = Matrix(q.asDiagonal());
  h.B = h.parts[0] + h.parts[1] + h.parts[2] + h.parts[3] + h.parts[4];
  return h;
}

inline HessianBlock hessian_block(const SoftmaxProblem& p, std::size_t j,
                                  const Vector& x) {
  return hessian_from_softmax(softmax_block(p, j, x).f, p.block(j).b);
}

/// Hessian of the exp part, sum_j A_j^T B_j(x) A_j.
inline Matrix hessian_exp_total(const SoftmaxProblem& p, const Vector& x) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  Matrix H = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < p.n_blocks(); ++j) {
    const auto& A = p.block(j).A;
    H += A.transpose() * hessian_block(p, j, x).B * A;
  }
  return 0.5 * (H + H.transpose());
}

/// Hessian of the regularizer, sum_j A_j^T W^2 A_j (constant in x).
inline Matrix hessian_reg_total(const SoftmaxProblem& p) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  const Vector w2 = p.reg_weights().array().square().matrix();
  Matrix H = Matrix::Zero(d, d);
  for (const auto& blk : p.blocks()) {
    H += blk.A.transpose() * w2.asDiagonal() * blk.A;
  }
  return H;
}

inline Matrix hessian_total(const SoftmaxProblem& p, const Vector& x) {
  return hessian_exp_total(p, x) + hessian_reg_total(p);
}

/// Default central-difference steps.
inline double fd_gradient_step(const Vector& x) {
  return 1e-5 * (1.0 + x.lpNorm<Eigen::Infinity>());
}
inline double fd_hessian_step(const Vector& x) {
  return 1e-4 * (1.0 + x.lpNorm<Eigen::Infinity>());
}

/// Central differences (loss(x + h e_i) - loss(x - h e_i)) / 2h.
template <typename Loss>
Vector fd_gradient_oracle(Loss&& loss, const Vector& x, double h) {
  if (!(h > 0.0)) throw InputError("finite-difference step must be positive");
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    const double up = loss(xp);
    xp(i) = x(i) - h;
    const double down = loss(xp);
    xp(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

/// Central-difference Jacobian of a vector field; column i is
/// (grad(x + h e_i) - grad(x - h e_i)) / 2h.
template <typename Field>
Matrix fd_jacobian_oracle(Field&& field, const Vector& x, double h) {
  if (!(h > 0.0)) throw InputError("finite-difference step must be positive");
  const Vector g0 = field(x);
  Matrix J(g0.size(), x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    const Vector up = field(xp);
    xp(i) = x(i) - h;
    const Vector down = field(xp);
    xp(i) = x(i);
    J.col(i) = (up - down) / (2.0 * h);
  }
  return J;
}

}  // namespace zospsa

#endif  // ZOSPSA_CALCULUS_HPP_
