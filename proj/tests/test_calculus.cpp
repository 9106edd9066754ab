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


#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "zospsa/calculus.hpp"
#include "zospsa/diagnostics.hpp"

namespace zospsa {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(GradientParts, WorkedExample) {
  const auto parts = gradient_parts(vec({2.0 / 3.0, 1.0 / 3.0}), vec({1.0, 0.0}));
  EXPECT_NEAR(parts.g(0), -4.0 / 27.0, 1e-15);
  EXPECT_NEAR(parts.g(1), 4.0 / 27.0, 1e-15);
  EXPECT_NEAR(parts.g1(0), -2.0 / 27.0, 1e-15);
  EXPECT_NEAR(parts.g2(1), 1.0 / 9.0, 1e-15);
}

TEST(GradientParts, VanishesAtPerfectFit) {
  const Vector f = vec({0.2, 0.3, 0.5});
  EXPECT_LT(gradient_parts(f, f).g.norm(), 1e-16);
}

TEST(Gradient, SingleRowIsZero) {
  const auto p = testing::single_block(Matrix::Constant(1, 2, 0.5), vec({0.3}),
                                       vec({0.0}));
  EXPECT_LT(grad_exp_block(p, 0, vec({1.0, -2.0})).norm(), 1e-16);
}

TEST(Gradient, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = testing::small_instance(seed, 3, 5, 3, 4.0);
    const Vector x = testing::ball_point(p, seed);
    for (std::size_t j = 0; j < p.n_blocks(); ++j) {
      const Vector fd = fd_gradient_oracle(
          [&](const Vector& y) { return loss_exp_block(p, j, y); }, x,
          fd_gradient_step(x));
      const Vector g = grad_exp_block(p, j, x);
      EXPECT_LE((g - fd).norm(), 1e-6 * g.norm()) << "seed " << seed;
      const Vector fr = fd_gradient_oracle(
          [&](const Vector& y) { return loss_reg_block(p, j, y); }, x,
          fd_gradient_step(x));
      const Vector gr = grad_reg_block(p, j, x);
      EXPECT_LE((gr - fr).norm(), 1e-6 * gr.norm());
    }
    const Vector fd = fd_gradient_oracle(
        [&](const Vector& y) { return loss_total(p, y); }, x,
        fd_gradient_step(x));
    EXPECT_LE((grad_total(p, x) - fd).norm(), 1e-6 * fd.norm());
  }
}

TEST(Gradient, BatchConventionsAgree) {
  const auto p = testing::small_instance(2);
  const Vector x = testing::ball_point(p, 9);
  const std::vector<std::size_t> batch{0, 2};
  const Vector with = grad_total(p, x, batch);
  const Vector without = grad_total(p, x, batch, {false});
  const Vector manual = grad_exp_block(p, 0, x) + grad_exp_block(p, 2, x);
  EXPECT_LT((without - manual).norm(), 1e-12);
  EXPECT_LT((with - manual - grad_reg_block(p, 0, x) - grad_reg_block(p, 2, x))
                .norm(),
            1e-12);
  EXPECT_LT((per_block_gradients(p, x).rowwise().sum() - grad_total(p, x))
                .norm(),
            1e-12);
}

TEST(Gradient, EvalCounters) {
  const auto p = testing::small_instance(1);
  const Vector x = Vector::Zero(4);
  const auto before = eval_counters();
  grad_total(p, x);
  loss_total(p, x);
  loss_total(p, x);
  EXPECT_EQ(eval_counters().grad_evals, before.grad_evals + 1);
  EXPECT_EQ(eval_counters().loss_evals, before.loss_evals + 2);
}

TEST(Hessian, SingleRowIsZero) {
  const auto h = hessian_from_softmax(vec({1.0}), vec({0.0}));
  EXPECT_DOUBLE_EQ(h.B(0, 0), 0.0);
}

TEST(Hessian, PartsSumToWhole) {
  const auto h = hessian_from_softmax(vec({0.1, 0.6, 0.3}), vec({0.5, 0.2, 0.1}));
  EXPECT_LT((h.rank_part() + h.diag_part() - h.B).norm(), 1e-15);
  EXPECT_LT((h.B - h.B.transpose()).norm(), 1e-15);
  EXPECT_LE(numerical_rank(h.rank_part()), 3);
}

TEST(Hessian, PerfectFitExample) {
  // b = f: <3f-2b,f> = |f|^2, q = f o f, <f-b,f> = 0.
  const Vector f = vec({0.25, 0.75});
  const auto h = hessian_from_softmax(f, f);
  const Vector q = f.cwiseProduct(f);
  const Matrix expected = f.squaredNorm() * f * f.transpose() -
                          q * f.transpose() - f * q.transpose() +
                          Matrix(q.asDiagonal());
  EXPECT_LT((h.B - expected).norm(), 1e-15);
}

TEST(Hessian, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = testing::small_instance(seed, 3, 5, 3, 4.0);
    const Vector x = testing::ball_point(p, seed + 40);
    const Matrix fd = fd_jacobian_oracle(
        [&](const Vector& y) { return grad_total(p, y); }, x,
        fd_hessian_step(x));
    EXPECT_LT((hessian_total(p, x) - fd).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Hessian, ExpCurvatureBoundedBelow) {
  // lambda_min(B(f, b)) >= -1/4 for f in the open simplex and b >= 0 with
  // ||b||_1 <= 1; probe random interior points, near-vertex logits and
  // vertex targets.
  const CounterRng rng(99);
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 20000; ++t) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(1, t, 7));
    const double scale = 0.1 + 8.0 * rng.uniform(2, t);
    Vector u(n), b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      u(i) = scale * rng.normal(3 + t, static_cast<std::uint64_t>(i));
      b(i) = -std::log(rng.uniform(4 + t, static_cast<std::uint64_t>(i)));
    }
    if (t % 3 == 0) {
      b.setZero();
      b(static_cast<Eigen::Index>(rng.below(5, t, static_cast<std::uint64_t>(n)))) = 1.0;
    } else {
      b *= rng.uniform(6, t) / b.sum();
    }
    const Vector f = softmax(u).f;
    worst = std::min(worst, min_eigenvalue(hessian_from_softmax(f, b).B));
  }
  EXPECT_GE(worst, -kExpCurvatureBound);
  EXPECT_LT(worst, -0.2);  // the bound is nearly tight
}

TEST(FiniteDifference, OraclesOnQuadratic) {
  const Matrix Q = (Matrix(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
  auto loss = [&](const Vector& y) { return 0.5 * y.dot(Q * y); };
  auto field = [&](const Vector& y) -> Vector { return Q * y; };
  const Vector x = vec({0.3, -1.2});
  EXPECT_LT((fd_gradient_oracle(loss, x, 1e-3) - Q * x).norm(), 1e-10);
  EXPECT_LT((fd_jacobian_oracle(field, x, 1e-3) - Q).norm(), 1e-10);
  EXPECT_THROW(fd_gradient_oracle(loss, x, 0.0), InputError);
  EXPECT_THROW(fd_jacobian_oracle(field, x, -1.0), InputError);
}

}  // namespace
}  // namespace zospsa
