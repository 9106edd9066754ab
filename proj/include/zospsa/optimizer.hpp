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

// Minibatch ZO-SGD, x_{t+1} = x_t - eta * g_hat(x_t), with a first-order
// SGD baseline that swaps the estimate for the analytic batch gradient.

#ifndef ZOSPSA_OPTIMIZER_HPP_
#define ZOSPSA_OPTIMIZER_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "zospsa/calculus.hpp"
#include "zospsa/errors.hpp"
#include "zospsa/estimator.hpp"
#include "zospsa/model.hpp"
#include "zospsa/sampling.hpp"

namespace zospsa {

enum class Mode { kZerothOrder, kFirstOrder };

inline std::string to_string(Mode m) {
  return m == Mode::kZerothOrder ? "zeroth_order" : "first_order";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "zeroth_order") return Mode::kZerothOrder;
  if (s == "first_order") return Mode::kFirstOrder;
  throw ConfigError("unknown optimizer mode '" + s + "'");
}

/// Iterates whose norm exceeds this are treated as diverged.
inline constexpr double kDivergenceNorm = 1e6;

struct OptConfig {
  std::optional<double> eta;  // unset = "auto", resolved by the caller
  std::size_t batch_size = 1;
  std::int64_t max_iters = 100000;
  double target_gap = 1e-4;
  SpsaConfig spsa;
  Mode mode = Mode::kZerothOrder;
  LossOptions loss;
  bool record_timing = true;

  void validate(std::size_t n_blocks) const {
    if (eta && !(*eta > 0.0 && std::isfinite(*eta))) {
      throw ConfigError("eta must be positive");
    }
    if (batch_size < 1 || batch_size > n_blocks) {
      throw ConfigError("batch_size must lie in [1, n_blocks]");
    }
    if (max_iters < 0) throw ConfigError("max_iters must be nonnegative");
    if (!(target_gap > 0.0)) throw ConfigError("target_gap must be positive");
    spsa.validate();
  }
};

struct OptState {
  Vector x;
  std::uint64_t iter = 0;
  double eta_current = 0.0;
  std::uint64_t rng_position = 0;  // index of the next perturbation/batch draw
};

struct TraceRecord {
  std::uint64_t iter = 0;
  double loss = 0.0;
  double loss_gap = 0.0;
  double grad_sq = 0.0;  // ||grad L(x_t)||^2, logging only
  double est_sq = 0.0;   // ||g_hat||^2 of the step that produced x_t
  double eta = 0.0;
  std::vector<std::size_t> batch;
  double wall_ms = 0.0;
};

enum class RunStatus { kConverged, kMaxIters };

struct RunTrace {
  std::vector<TraceRecord> records;
  double max_x_norm = 0.0;
  Vector final_x;
  RunStatus status = RunStatus::kMaxIters;

  std::uint64_t iterations() const {
    return records.empty() ? 0 : records.back().iter;
  }
};

/// Divergence during run(); carries the trace up to the failure and the
/// offending iterate.
class RunDivergedError : public DivergenceError {
 public:
  RunDivergedError(const std::string& what, RunTrace partial, Vector iterate)
      : DivergenceError(what),
        trace(std::move(partial)),
        iterate(std::move(iterate)) {}
  RunTrace trace;
  Vector iterate;
};

struct StepOutcome {
  OptState state;
  Vector direction;
  std::vector<std::size_t> batch;
};

inline StepOutcome step_detailed(const SoftmaxProblem& p, const OptState& s,
                                 const OptConfig& cfg) {
  if (!cfg.eta && !(s.eta_current > 0.0)) {
    throw ConfigError("eta is 'auto' but no step size was resolved");
  }
  const double eta = cfg.eta ? *cfg.eta : s.eta_current;
  const CounterRng batch_rng(splitmix64(cfg.spsa.seed ^ 0xB47C4ull));

  StepOutcome out;
  out.batch = sample_batch(batch_rng, s.rng_position, p.n_blocks(),
                           cfg.batch_size);
  if (cfg.mode == Mode::kZerothOrder) {
    out.direction =
        spsa_estimate(p, s.x, out.batch, cfg.spsa, s.rng_position, cfg.loss)
            .g_hat;
  } else {
    out.direction = grad_total(p, s.x, out.batch, cfg.loss);
  }
  out.state.x = s.x - eta * out.direction;
  out.state.iter = s.iter + 1;
  out.state.eta_current = eta;
  out.state.rng_position = s.rng_position + 1;
  if (!out.state.x.allFinite() || out.state.x.norm() > kDivergenceNorm) {
    std::ostringstream msg;
    msg << "iterate diverged at step " << out.state.iter
        << " (||x|| = " << out.state.x.norm() << ")";
    throw DivergenceError(msg.str());
  }
  return out;
}

/// One optimizer step: sample a batch, estimate, update.
inline OptState step(const SoftmaxProblem& p, const OptState& s,
                     const OptConfig& cfg) {
  return step_detailed(p, s, cfg).state;
}

/// Minimal inputs of the step-size rule min{1/l, mu B / (l alpha)}.
inline double auto_step_size(double l_emp, double mu_cert,
                             std::size_t batch_size, double alpha) {
  if (!(l_emp > 0.0)) throw DiagnosticsError("l_emp must be positive");
  if (!(mu_cert > 0.0)) throw DiagnosticsError("mu_cert must be positive");
  const double first = 1.0 / l_emp;
  if (!(alpha > 0.0)) return first;
  return std::min(first, mu_cert * static_cast<double>(batch_size) /
                             (l_emp * alpha));
}

/// Runs until the gap to L_star drops to target_gap or max_iters steps
/// have been taken. The true gradient is computed for the trace only.
inline RunTrace run(const SoftmaxProblem& p, const Vector& x0,
                    const OptConfig& cfg, double L_star) {
  cfg.validate(p.n_blocks());
  require_finite(x0, p.dim());
  if (!cfg.eta) throw ConfigError("run needs a resolved eta");

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed_ms = [&] {
    if (!cfg.record_timing) return 0.0;
    return std::chrono::duration<double, std::milli>(Clock::now() - t0)
        .count();
  };

  RunTrace trace;
  OptState state{x0, 0, *cfg.eta, 0};
  auto record = [&](const Vector& direction,
                    const std::vector<std::size_t>& batch) {
    TraceRecord r;
    r.iter = state.iter;
    r.loss = loss_total(p, state.x);
    r.loss_gap = r.loss - L_star;
    r.grad_sq = grad_total(p, state.x).squaredNorm();
    r.est_sq = direction.size() ? direction.squaredNorm() : 0.0;
    r.eta = *cfg.eta;
    r.batch = batch;
    r.wall_ms = elapsed_ms();
    trace.max_x_norm = std::max(trace.max_x_norm, state.x.norm());
    trace.records.push_back(std::move(r));
    return trace.records.back();
  };

  auto rec = record(Vector(), {});
  while (true) {
    if (!std::isfinite(rec.loss)) {
      throw RunDivergedError("non-finite loss", trace, state.x);
    }
    if (rec.loss_gap <= cfg.target_gap) {
      trace.status = RunStatus::kConverged;
      break;
    }
    if (static_cast<std::int64_t>(state.iter) >= cfg.max_iters) {
      trace.status = RunStatus::kMaxIters;
      break;
    }
    StepOutcome out;
    try {
      out = step_detailed(p, state, cfg);
    } catch (const DivergenceError& e) {
      throw RunDivergedError(e.what(), trace, state.x);
    }
    state = std::move(out.state);
    rec = record(out.direction, out.batch);
  }
  trace.final_x = state.x;
  return trace;
}

/// Least-squares slope of log(gap) against iteration over the final
/// `fraction` of the trace, returned as a per-iteration factor exp(slope).
/// Records with nonpositive gap are skipped.
inline double fit_decay_factor(const RunTrace& trace, double fraction = 0.8) {
  const auto& rs = trace.records;
  const std::size_t start = static_cast<std::size_t>(
      std::floor((1.0 - fraction) * static_cast<double>(rs.size())));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = start; i < rs.size(); ++i) {
    if (!(rs[i].loss_gap > 0.0)) continue;
    const double xi = static_cast<double>(rs[i].iter);
    const double yi = std::log(rs[i].loss_gap);
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mm = static_cast<double>(m);
  const double denom = mm * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::exp((mm * sxy - sx * sy) / denom);
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_trace_csv(const RunTrace& trace, std::ostream& os) {
  os << "iter,loss,loss_gap,grad_sq,est_sq,eta,batch,wall_ms\n";
  for (const auto& r : trace.records) {
    os << r.iter << ',' << format_double(r.loss) << ','
       << format_double(r.loss_gap) << ',' << format_double(r.grad_sq) << ','
       << format_double(r.est_sq) << ',' << format_double(r.eta) << ',';
    for (std::size_t i = 0; i < r.batch.size(); ++i) {
      if (i) os << ';';
      os << r.batch[i];
    }
    os << ',' << format_double(r.wall_ms) << '\n';
  }
}

}  // namespace zospsa

#endif  // ZOSPSA_OPTIMIZER_HPP_
