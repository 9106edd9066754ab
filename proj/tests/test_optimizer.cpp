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
#include <limits>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "zospsa/diagnostics.hpp"
#include "zospsa/optimizer.hpp"

namespace zospsa {
namespace {

using testing::identity_quadratic;

OptConfig config(std::size_t B, Mode mode, double eta) {
  OptConfig c;
  c.batch_size = B;
  c.mode = mode;
  c.eta = eta;
  c.record_timing = false;
  return c;
}

TEST(Step, FirstOrderUnitStepSolvesQuadratic) {
  const auto p = identity_quadratic(3);
  OptState s{Vector::Constant(3, 2.5), 0, 0.0, 0};
  const auto next = step(p, s, config(3, Mode::kFirstOrder, 1.0));
  EXPECT_LT(next.x.norm(), 1e-15);
  EXPECT_EQ(next.iter, 1u);
  EXPECT_EQ(next.rng_position, 1u);
  EXPECT_DOUBLE_EQ(next.eta_current, 1.0);
}

TEST(Step, ZeroEstimateIsFixedPoint) {
  // The quadratic is even about 0, so both SPSA evaluations agree.
  const auto p = identity_quadratic(4);
  OptState s{Vector::Zero(4), 0, 0.0, 0};
  const auto next = step(p, s, config(2, Mode::kZerothOrder, 0.3));
  EXPECT_EQ(next.x, Vector::Zero(4));
}

TEST(Step, SamplesSortedBatchWithoutReplacement) {
  const auto p = testing::small_instance(1, 6);
  OptState s{Vector::Zero(4), 0, 0.0, 0};
  const auto cfg = config(3, Mode::kZerothOrder, 0.01);
  for (int t = 0; t < 30; ++t) {
    const auto out = step_detailed(p, s, cfg);
    ASSERT_EQ(out.batch.size(), 3u);
    for (std::size_t i = 1; i < out.batch.size(); ++i) {
      EXPECT_LT(out.batch[i - 1], out.batch[i]);
    }
    EXPECT_LT(out.batch.back(), 6u);
    s = out.state;
  }
}

TEST(Step, ZerothOrderUpdateIsGradientFree) {
  const auto p = testing::small_instance(2);
  OptState s{testing::ball_point(p, 1), 0, 0.0, 0};
  const auto before = eval_counters();
  step(p, s, config(2, Mode::kZerothOrder, 0.01));
  EXPECT_EQ(eval_counters().grad_evals, before.grad_evals);
  EXPECT_EQ(eval_counters().loss_evals, before.loss_evals + 2);
}

TEST(Step, DivergenceCarriesIterate) {
  const auto p = testing::small_instance(2);
  OptState s{testing::ball_point(p, 1), 0, 0.0, 0};
  EXPECT_THROW(step(p, s, config(4, Mode::kFirstOrder, 1e9)), DivergenceError);
  try {
    run(p, s.x, config(4, Mode::kFirstOrder, 1e9), 0.0);
    FAIL() << "expected divergence";
  } catch (const RunDivergedError& e) {
    EXPECT_EQ(e.trace.records.size(), 1u);
    EXPECT_EQ(e.iterate, s.x);
  }
}

TEST(Step, NeedsResolvedEta) {
  const auto p = testing::small_instance(2);
  OptConfig cfg = config(2, Mode::kZerothOrder, 0.1);
  cfg.eta.reset();
  EXPECT_THROW(step(p, OptState{Vector::Zero(4), 0, 0.0, 0}, cfg), ConfigError);
  EXPECT_THROW(run(p, Vector::Zero(4), cfg, 0.0), ConfigError);
}

TEST(OptConfigTest, Validation) {
  OptConfig c = config(2, Mode::kZerothOrder, 0.1);
  EXPECT_NO_THROW(c.validate(4));
  c.batch_size = 5;
  EXPECT_THROW(c.validate(4), ConfigError);
  c.batch_size = 0;
  EXPECT_THROW(c.validate(4), ConfigError);
  c = config(2, Mode::kZerothOrder, -1.0);
  EXPECT_THROW(c.validate(4), ConfigError);
  c = config(2, Mode::kZerothOrder, 0.1);
  c.target_gap = 0.0;
  EXPECT_THROW(c.validate(4), ConfigError);
  c = config(2, Mode::kZerothOrder, 0.1);
  c.max_iters = -1;
  EXPECT_THROW(c.validate(4), ConfigError);
  EXPECT_THROW(parse_mode("second_order"), ConfigError);
  EXPECT_EQ(parse_mode(to_string(Mode::kFirstOrder)), Mode::kFirstOrder);
}

TEST(AutoStep, Examples) {
  EXPECT_DOUBLE_EQ(auto_step_size(2.0, 1.0, 1, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(auto_step_size(2.0, 1.0, 1, 1e-300), 0.5);
  EXPECT_DOUBLE_EQ(auto_step_size(4.0, 3.0, 2, 5.0), 0.25);
  EXPECT_DOUBLE_EQ(auto_step_size(4.0, 1.0, 1, 8.0), 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(auto_step_size(4.0, 1.0, 1, 0.0), 0.25);
  EXPECT_THROW(auto_step_size(0.0, 1.0, 1, 1.0), DiagnosticsError);
  EXPECT_THROW(auto_step_size(1.0, 0.0, 1, 1.0), DiagnosticsError);
}

TEST(Run, ZeroIterationsRecordsInitialPoint) {
  const auto p = testing::small_instance(3);
  OptConfig cfg = config(2, Mode::kZerothOrder, 0.01);
  cfg.max_iters = 0;
  const auto t = run(p, Vector::Zero(4), cfg, 0.0);
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].iter, 0u);
  EXPECT_TRUE(t.records[0].batch.empty());
  EXPECT_EQ(t.status, RunStatus::kMaxIters);
}

TEST(Run, InfiniteTargetConvergesImmediately) {
  const auto p = testing::small_instance(3);
  OptConfig cfg = config(2, Mode::kZerothOrder, 0.01);
  cfg.target_gap = std::numeric_limits<double>::infinity();
  const auto t = run(p, Vector::Zero(4), cfg, 0.0);
  EXPECT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.status, RunStatus::kConverged);
}

TEST(Run, RejectsNonFiniteStart) {
  const auto p = testing::small_instance(3);
  Vector x0 = Vector::Zero(4);
  x0(2) = INFINITY;
  EXPECT_THROW(run(p, x0, config(2, Mode::kZerothOrder, 0.01), 0.0), InputError);
}

TEST(Run, DeterministicAndMonotoneIterations) {
  const auto p = testing::small_instance(4);
  OptConfig cfg = config(2, Mode::kZerothOrder, 0.01);
  cfg.max_iters = 50;
  const Vector x0 = testing::ball_point(p, 2);
  const auto a = run(p, x0, cfg, 0.0);
  const auto b = run(p, x0, cfg, 0.0);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].iter, i);
    EXPECT_EQ(a.records[i].loss, b.records[i].loss);
    EXPECT_EQ(a.records[i].batch, b.records[i].batch);
    EXPECT_EQ(a.records[i].wall_ms, 0.0);
  }
  EXPECT_EQ(a.final_x, b.final_x);
}

TEST(Run, FullBatchFirstOrderIsMonotoneAndLinear) {
  const auto p = testing::small_instance(5);
  const auto sm = empirical_smoothness(p, 100, 1);
  const auto opt = minimize_full_gradient(p, sm.l_emp);
  OptConfig cfg = config(p.n_blocks(), Mode::kFirstOrder, 1.0 / sm.l_emp);
  cfg.target_gap = 1e-10;
  const auto t = run(p, testing::ball_point(p, 8), cfg, opt.L_star);
  EXPECT_EQ(t.status, RunStatus::kConverged);
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    EXPECT_LE(t.records[i].loss, t.records[i - 1].loss + 1e-13);
  }
  EXPECT_LT(fit_decay_factor(t), 1.0);
}

TEST(Run, ZerothOrderNoSlowerThanGammaTimesFirstOrder) {
  const auto p = testing::small_instance(6);
  DiagOptions o;
  OptConfig base = config(2, Mode::kZerothOrder, 0.1);
  const Vector x0 = testing::ball_point(p, 3);
  const auto diag = diagnose(p, o, base, x0, false);
  base.eta = diag.eta_auto;
  base.target_gap = 1e-3;
  const auto zo = run(p, x0, base, diag.L_star);
  OptConfig fo = base;
  fo.mode = Mode::kFirstOrder;
  const auto fot = run(p, x0, fo, diag.L_star);
  ASSERT_EQ(zo.status, RunStatus::kConverged);
  ASSERT_EQ(fot.status, RunStatus::kConverged);
  const double ratio = static_cast<double>(zo.iterations()) /
                       static_cast<double>(std::max<std::uint64_t>(1, fot.iterations()));
  EXPECT_LE(ratio, 10.0 * diag.gamma);
}

TEST(Trace, DecayFactorOfGeometricSequence) {
  RunTrace t;
  for (std::uint64_t i = 0; i < 50; ++i) {
    TraceRecord r;
    r.iter = i;
    r.loss_gap = 3.0 * std::pow(0.9, static_cast<double>(i));
    t.records.push_back(r);
  }
  EXPECT_NEAR(fit_decay_factor(t), 0.9, 1e-12);
  t.records.resize(1);
  EXPECT_TRUE(std::isnan(fit_decay_factor(t)));
}

TEST(Trace, CsvLayout) {
  RunTrace t;
  TraceRecord r0;
  r0.loss = 1.5;
  r0.loss_gap = 0.25;
  t.records.push_back(r0);
  TraceRecord r1 = r0;
  r1.iter = 1;
  r1.batch = {0, 3};
  r1.eta = 0.125;
  t.records.push_back(r1);
  std::ostringstream os;
  write_trace_csv(t, os);
  EXPECT_EQ(os.str(),
            "iter,loss,loss_gap,grad_sq,est_sq,eta,batch,wall_ms\n"
            "0,1.5,0.25,0,0,0,,0\n"
            "1,1.5,0.25,0,0,0.125,0;3,0\n");
}

}  // namespace
}  // namespace zospsa
