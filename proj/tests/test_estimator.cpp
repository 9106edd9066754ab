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
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "zospsa/estimator.hpp"

namespace zospsa {
namespace {

SpsaConfig sphere(int k = 1, std::uint64_t seed = 0) {
  SpsaConfig c;
  c.k_samples = k;
  c.seed = seed;
  return c;
}

TEST(Perturbation, DeterministicAndDistinct) {
  const PerturbationStream a{CounterRng(5), 3, 0};
  const PerturbationStream b{CounterRng(5), 3, 1};
  const PerturbationStream c{CounterRng(6), 3, 0};
  EXPECT_EQ(sample_perturbation(a, 8), sample_perturbation(a, 8));
  EXPECT_NE(sample_perturbation(a, 8), sample_perturbation(b, 8));
  EXPECT_NE(sample_perturbation(a, 8), sample_perturbation(c, 8));
}

TEST(Perturbation, StandardNormalMoments) {
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  const PerturbationStream s{CounterRng(1), 0, 0};
  const Vector z = sample_perturbation(s, static_cast<std::size_t>(n));
  sum = z.sum();
  sq = z.squaredNorm();
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Perturbation, SphereHasNormSqrtD) {
  for (std::uint64_t it = 0; it < 20; ++it) {
    const PerturbationStream s{CounterRng(2), it, 0};
    EXPECT_NEAR(perturbation_direction(s, 7, PerturbationKind::kSphere).norm(),
                std::sqrt(7.0), 1e-12);
    EXPECT_EQ(perturbation_direction(s, 7, PerturbationKind::kGaussian),
              sample_perturbation(s, 7));
  }
}

TEST(Spsa, LinearObjectiveIsProjection) {
  const Vector g = testing::gaussian_matrix(3, 5, 1);
  auto linear = [&](const Vector& y) { return g.dot(y); };
  const Vector x = Vector::Zero(5);
  for (auto kind : {PerturbationKind::kSphere, PerturbationKind::kGaussian}) {
    SpsaConfig cfg = sphere(1, 4);
    cfg.perturbation = kind;
    const auto est = spsa_estimate(linear, x, cfg, 11);
    const Vector p =
        perturbation_direction(PerturbationStream{CounterRng(4), 11, 0}, 5, kind);
    EXPECT_LT((est.g_hat - p * p.dot(g)).norm(), 1e-8 * g.norm() * 5.0);
    EXPECT_EQ(est.evals, 2u);
  }
}

TEST(Spsa, AveragesKSamplesAndCountsEvals) {
  const Vector g = testing::gaussian_matrix(4, 3, 1);
  int calls = 0;
  auto linear = [&](const Vector& y) {
    ++calls;
    return g.dot(y);
  };
  const SpsaConfig cfg = sphere(4, 1);
  const auto est = spsa_estimate(linear, Vector::Zero(3), cfg, 2);
  EXPECT_EQ(calls, 8);
  EXPECT_EQ(est.evals, 8u);
  Vector manual = Vector::Zero(3);
  for (std::uint64_t s = 0; s < 4; ++s) {
    const Vector p = perturbation_direction(
        PerturbationStream{CounterRng(1), 2, s}, 3, PerturbationKind::kSphere);
    manual += p * p.dot(g);
  }
  EXPECT_LT((est.g_hat - manual / 4.0).norm(), 1e-8);
}

TEST(Spsa, ReproducibleFromSeedAndIteration) {
  const auto p = testing::small_instance(1);
  const Vector x = testing::ball_point(p, 2);
  const auto all = full_batch(p);
  const SpsaConfig cfg = sphere(2, 9);
  const auto a = spsa_estimate(p, x, all, cfg, 5);
  const auto b = spsa_estimate(p, x, all, cfg, 5);
  const auto c = spsa_estimate(p, x, all, cfg, 6);
  EXPECT_EQ(a.g_hat, b.g_hat);
  EXPECT_NE(a.g_hat, c.g_hat);
  EXPECT_EQ(a.batch, all);
}

TEST(Spsa, ZerothOrderPathNeverTouchesGradient) {
  const auto p = testing::small_instance(1);
  const Vector x = testing::ball_point(p, 2);
  const auto all = full_batch(p);
  const auto before = eval_counters();
  spsa_estimate(p, x, all, sphere(3), 0);
  EXPECT_EQ(eval_counters().grad_evals, before.grad_evals);
  EXPECT_EQ(eval_counters().loss_evals, before.loss_evals + 6);
}

TEST(Spsa, DefaultEpsilonScalesWithX) {
  SpsaConfig cfg;
  Vector x = Vector::Zero(3);
  EXPECT_DOUBLE_EQ(cfg.epsilon_at(x), 1e-4);
  x(0) = 3.0;
  EXPECT_DOUBLE_EQ(cfg.epsilon_at(x), 4e-4);
  cfg.epsilon = 1e-6;
  EXPECT_DOUBLE_EQ(cfg.epsilon_at(x), 1e-6);
}

TEST(Spsa, ConfigValidation) {
  SpsaConfig cfg;
  cfg.k_samples = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.k_samples = 1;
  cfg.epsilon = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_perturbation("uniform"), ConfigError);
  EXPECT_EQ(parse_perturbation(to_string(PerturbationKind::kGaussian)),
            PerturbationKind::kGaussian);
}

TEST(Spsa, RejectsBadInputs) {
  const auto p = testing::small_instance(1);
  const auto all = full_batch(p);
  Vector x = Vector::Zero(4);
  x(1) = NAN;
  EXPECT_THROW(spsa_estimate(p, x, all, sphere()), InputError);
  EXPECT_THROW(spsa_estimate(p, Vector::Zero(4), std::vector<std::size_t>{},
                             sphere()),
               InputError);
}

TEST(Spsa, UnbiasedAtFullBatch) {
  const auto p = testing::small_instance(4);
  const Vector x = testing::ball_point(p, 3);
  const auto m = spsa_mean_check(p, x, full_batch(p), sphere(1, 2), 20000);
  EXPECT_LT(m.rel_error, 0.05);
  EXPECT_THROW(spsa_mean_check(p, x, full_batch(p), sphere(), 100), ConfigError);
}

TEST(Spsa, ExpectedSqNormRatioClosedForms) {
  EXPECT_DOUBLE_EQ(expected_sq_norm_ratio(10, 1, PerturbationKind::kSphere), 10.0);
  EXPECT_DOUBLE_EQ(expected_sq_norm_ratio(10, 5, PerturbationKind::kSphere), 2.8);
  EXPECT_DOUBLE_EQ(expected_sq_norm_ratio(10, 1, PerturbationKind::kGaussian), 12.0);
}

struct RatioCase {
  int k;
  PerturbationKind kind;
  double expected;
};

class SqNormRatioTest : public ::testing::TestWithParam<RatioCase> {};

TEST_P(SqNormRatioTest, MonteCarloMatchesClosedForm) {
  const auto c = GetParam();
  const auto p = testing::small_instance(6, 2, 12, 10, 4.0);
  const Vector x = testing::ball_point(p, 1);
  SpsaConfig cfg = sphere(c.k, 3);
  cfg.perturbation = c.kind;
  cfg.epsilon = 1e-5;
  const auto r = sq_norm_ratio_check(p, x, full_batch(p), cfg, 20000);
  EXPECT_DOUBLE_EQ(r.expected, c.expected);
  EXPECT_NEAR(r.ratio, c.expected, 0.05 * c.expected);
  EXPECT_LT(std::abs(r.ratio - c.expected), 5.0 * r.std_error + 1e-3);
}

INSTANTIATE_TEST_SUITE_P(
    Laws, SqNormRatioTest,
    ::testing::Values(RatioCase{1, PerturbationKind::kSphere, 10.0},
                      RatioCase{5, PerturbationKind::kSphere, 2.8},
                      RatioCase{1, PerturbationKind::kGaussian, 12.0},
                      RatioCase{5, PerturbationKind::kGaussian, 3.2}));

TEST(Covariance, FullBatchAndSingleBlockVanish) {
  const auto p = testing::small_instance(2);
  const Vector x = testing::ball_point(p, 4);
  EXPECT_EQ(minibatch_covariance(p, x, p.n_blocks()), Matrix::Zero(4, 4));
  EXPECT_EQ(minibatch_covariance_mc(p, x, p.n_blocks(), CounterRng(1), 50),
            Matrix::Zero(4, 4));
  const auto q = testing::small_instance(2, 1);
  EXPECT_EQ(minibatch_covariance(q, x, 1), Matrix::Zero(4, 4));
  EXPECT_THROW(minibatch_covariance(p, x, 0), InputError);
}

TEST(Covariance, ClosedFormMatchesSubsetEnumeration) {
  const auto p = testing::small_instance(8, 5, 6, 3);
  const Vector x = testing::ball_point(p, 5);
  const Matrix a = per_block_gradients(p, x);
  const Vector grad = grad_total(p, x);
  const std::size_t n = 5, B = 2;
  Matrix acc = Matrix::Zero(3, 3);
  int count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vector g = 2.5 * (a.col(static_cast<Eigen::Index>(i)) +
                              a.col(static_cast<Eigen::Index>(j)));
      acc += (g - grad) * (g - grad).transpose();
      ++count;
    }
  }
  const Matrix exact = static_cast<double>(B) * acc / count;
  EXPECT_LT((minibatch_covariance(p, x, B) - exact).norm(), 1e-10 * exact.norm());

  const Matrix mc = minibatch_covariance_mc(p, x, B, CounterRng(3), 40000);
  EXPECT_LT((mc - exact).norm(), 0.03 * exact.norm());
}

TEST(SecondMoment, ClosedFormsAgreeWithMonteCarlo) {
  const auto p = testing::small_instance(3);
  const Vector x = testing::ball_point(p, 6);
  for (auto kind : {PerturbationKind::kSphere, PerturbationKind::kGaussian}) {
    for (std::size_t B : {std::size_t{2}, p.n_blocks()}) {
      SpsaConfig cfg = sphere(1, 12);
      cfg.perturbation = kind;
      const auto rep = second_moment_check(p, x, B, cfg, 100000);
      EXPECT_LT(rep.dev_exact, 0.05) << to_string(kind) << " B=" << B;
      EXPECT_NEAR(rep.mean_sq_norm, rep.exact_model.trace(),
                  0.05 * rep.exact_model.trace());
    }
  }
}

TEST(SecondMoment, IsotropicOneOverDModelHasWrongTrace) {
  // The 1/d model has trace (2 + 1/d) tr M while the sphere law gives
  // d tr M at k = 1, so the two disagree for every d >= 1.
  for (Eigen::Index d : {1, 2, 4, 10}) {
    const Matrix G = testing::gaussian_matrix(static_cast<std::uint64_t>(d), d, d);
    const Matrix S = G * G.transpose();
    const double dd = static_cast<double>(d);
    EXPECT_NEAR(second_moment_stated(S).trace(), (2.0 + 1.0 / dd) * S.trace(),
                1e-9 * S.trace());
    EXPECT_NEAR(second_moment_exact(S, 1, PerturbationKind::kSphere).trace(),
                dd * S.trace(), 1e-9 * S.trace());
  }
}

TEST(SecondMoment, RejectsTooFewTrials) {
  const auto p = testing::small_instance(3);
  EXPECT_THROW(second_moment_check(p, Vector::Zero(4), 2, sphere(), 10),
               ConfigError);
}

}  // namespace
}  // namespace zospsa
