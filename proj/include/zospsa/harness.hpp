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


// Config-driven commands behind the zospsa CLI. Every command is a pure
// function of its ExperimentConfig; outputs land in {out}/ and are
// byte-identical across runs when timing is off.

#ifndef ZOSPSA_HARNESS_HPP_
#define ZOSPSA_HARNESS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "zospsa/calculus.hpp"
#include "zospsa/diagnostics.hpp"
#include "zospsa/errors.hpp"
#include "zospsa/estimator.hpp"
#include "zospsa/instance.hpp"
#include "zospsa/matrix_facts.hpp"
#include "zospsa/model.hpp"
#include "zospsa/optimizer.hpp"
#include "zospsa/serialization.hpp"

namespace zospsa {

/// Trial counts of the verification suite. Minimums follow the checks'
/// statistical tolerances.
struct VerifyConfig {
  int fd_points = 20;
  int rank_samples = 50;
  int spsa_trials = 10000;
  int second_moment_trials = 100000;
  int descent_anchors = 5;
  int descent_reps = 10000;
  int moment_trials = 20000;
  int fact_rounds = 100;

  void validate() const {
    auto at_least = [](int v, int lo, const char* name) {
      if (v < lo) {
        throw ConfigError(std::string("verify.") + name + " must be >= " +
                          std::to_string(lo));
      }
    };
    at_least(fd_points, 1, "fd_points");
    at_least(rank_samples, 1, "rank_samples");
    at_least(spsa_trials, 10000, "spsa_trials");
    at_least(second_moment_trials, 100000, "second_moment_trials");
    at_least(descent_anchors, 1, "descent_anchors");
    at_least(descent_reps, 10000, "descent_reps");
    at_least(moment_trials, 10000, "moment_trials");
    at_least(fact_rounds, 1, "fact_rounds");
  }
};

inline void validate_diag_options(const DiagOptions& o) {
  if (o.smoothness_samples < 100) {
    throw ConfigError("diag.smoothness_samples must be >= 100");
  }
  if (o.covariance_trials < 10000) {
    throw ConfigError("diag.covariance_trials must be >= 10000");
  }
  if (o.convexity_samples < 1 || o.rank_samples < 1 || o.beta_samples < 1 ||
      o.covariance_anchors < 1) {
    throw ConfigError("diag sample counts must be positive");
  }
}

struct ExperimentConfig {
  std::optional<Json> problem_inline;  // takes precedence over generator
  GeneratorParams generator;
  bool inject_bad_b = false;  // negative test: break ||b_0||_1 <= 1

  OptConfig opt;
  StartKind start = StartKind::kBall;
  std::uint64_t start_seed = 0;

  DiagOptions diag;
  VerifyConfig verify;

  std::string out_dir = "out";
  bool force = false;

  ExperimentConfig() {
    opt.batch_size = 2;
    opt.record_timing = false;
  }

  void validate() const {
    if (!problem_inline) {
      generator.validate();
      if (generator.radius < 0.1) {
        throw ConfigError("problem.generator.radius must be >= 0.1");
      }
    }
    validate_diag_options(diag);
    verify.validate();
    if (out_dir.empty()) throw ConfigError("output.dir must be nonempty");
  }
};

// ---------------------------------------------------------------- config ---

inline Json config_to_json(const ExperimentConfig& c) {
  Json j;
  Json& prob = j["problem"];
  prob["inline"] = c.problem_inline ? *c.problem_inline : Json(nullptr);
  Json& g = prob["generator"];
  g["n_blocks"] = c.generator.n_blocks;
  g["n_rows"] = c.generator.n_rows;
  g["dim"] = c.generator.dim;
  g["radius"] = c.generator.radius;
  g["mu_target"] = c.generator.mu_target;
  g["seed"] = c.generator.seed;
  g["b_scale_min"] = c.generator.b_scale_min;
  prob["inject_bad_b"] = c.inject_bad_b;

  Json& o = j["opt"];
  o["eta"] = c.opt.eta ? Json(*c.opt.eta) : Json("auto");
  o["batch_size"] = c.opt.batch_size;
  o["max_iters"] = c.opt.max_iters;
  o["target_gap"] =
      std::isfinite(c.opt.target_gap) ? Json(c.opt.target_gap) : Json("inf");
  o["mode"] = to_string(c.opt.mode);
  o["reg_in_batch"] = c.opt.loss.reg_in_batch;
  o["start"] = to_string(c.start);
  o["start_seed"] = c.start_seed;
  Json& s = o["spsa"];
  s["epsilon"] = c.opt.spsa.epsilon ? Json(*c.opt.spsa.epsilon) : Json("auto");
  s["k_samples"] = c.opt.spsa.k_samples;
  s["seed"] = c.opt.spsa.seed;
  s["perturbation"] = to_string(c.opt.spsa.perturbation);

  Json& d = j["diag"];
  d["smoothness_samples"] = c.diag.smoothness_samples;
  d["convexity_samples"] = c.diag.convexity_samples;
  d["rank_samples"] = c.diag.rank_samples;
  d["beta_samples"] = c.diag.beta_samples;
  d["covariance_trials"] = c.diag.covariance_trials;
  d["covariance_anchors"] = c.diag.covariance_anchors;
  d["seed"] = c.diag.seed;

  Json& v = j["verify"];
  v["fd_points"] = c.verify.fd_points;
  v["rank_samples"] = c.verify.rank_samples;
  v["spsa_trials"] = c.verify.spsa_trials;
  v["second_moment_trials"] = c.verify.second_moment_trials;
  v["descent_anchors"] = c.verify.descent_anchors;
  v["descent_reps"] = c.verify.descent_reps;
  v["moment_trials"] = c.verify.moment_trials;
  v["fact_rounds"] = c.verify.fact_rounds;

  Json& out = j["output"];
  out["dir"] = c.out_dir;
  out["force"] = c.force;
  out["record_timing"] = c.opt.record_timing;
  return j;
}

namespace detail {

/// Rejects keys absent from the reference layout. Null reference entries
/// (the inline problem) accept any value.
inline void check_known_keys(const Json& user, const Json& ref,
                             const std::string& path) {
  if (ref.is_null() || !ref.is_object()) return;
  if (!user.is_object()) {
    throw ConfigError("'" + path + "' must be an object");
  }
  for (const auto& [key, value] : user.items()) {
    const std::string sub = path.empty() ? key : path + "." + key;
    if (!ref.contains(key)) throw ConfigError("unknown config key '" + sub + "'");
    check_known_keys(value, ref.at(key), sub);
  }
}

inline std::optional<double> auto_or_number(const Json& j,
                                            const std::string& what) {
  if (j.is_string() && j.get<std::string>() == "auto") return std::nullopt;
  if (!j.is_number()) throw ConfigError(what + " must be a number or \"auto\"");
  return j.get<double>();
}

template <typename T>
T count_field(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError(what + " must be an integer");
  if constexpr (std::is_unsigned_v<T>) {
    if (j.get<std::int64_t>() < 0 && !j.is_number_unsigned()) {
      throw ConfigError(what + " must be nonnegative");
    }
  }
  return j.get<T>();
}

}  // namespace detail

inline ExperimentConfig config_from_json(const Json& user) {
  const Json defaults = config_to_json(ExperimentConfig{});
  detail::check_known_keys(user, defaults, "");
  Json j = defaults;
  for (const auto& [key, value] : user.items()) {
    if (value.is_object() && j[key].is_object()) {
      for (const auto& [k2, v2] : value.items()) {
        if (v2.is_object() && j[key][k2].is_object()) {
          for (const auto& [k3, v3] : v2.items()) j[key][k2][k3] = v3;
        } else {
          j[key][k2] = v2;
        }
      }
    } else {
      j[key] = value;
    }
  }

  ExperimentConfig c;
  try {
    using detail::count_field;
    const Json& prob = j.at("problem");
    if (!prob.at("inline").is_null()) c.problem_inline = prob.at("inline");
    const Json& g = prob.at("generator");
    c.generator.n_blocks = count_field<std::size_t>(g.at("n_blocks"), "n_blocks");
    c.generator.n_rows = count_field<std::size_t>(g.at("n_rows"), "n_rows");
    c.generator.dim = count_field<std::size_t>(g.at("dim"), "dim");
    c.generator.radius = g.at("radius").get<double>();
    c.generator.mu_target = g.at("mu_target").get<double>();
    c.generator.seed = count_field<std::uint64_t>(g.at("seed"), "seed");
    c.generator.b_scale_min = g.at("b_scale_min").get<double>();
    c.inject_bad_b = prob.at("inject_bad_b").get<bool>();

    const Json& o = j.at("opt");
    c.opt.eta = detail::auto_or_number(o.at("eta"), "opt.eta");
    c.opt.batch_size = count_field<std::size_t>(o.at("batch_size"), "batch_size");
    c.opt.max_iters = count_field<std::int64_t>(o.at("max_iters"), "max_iters");
    const Json& tg = o.at("target_gap");
    c.opt.target_gap = tg.is_string() && tg.get<std::string>() == "inf"
                           ? std::numeric_limits<double>::infinity()
                           : tg.get<double>();
    c.opt.mode = parse_mode(o.at("mode").get<std::string>());
    c.opt.loss.reg_in_batch = o.at("reg_in_batch").get<bool>();
    c.start = parse_start(o.at("start").get<std::string>());
    c.start_seed = count_field<std::uint64_t>(o.at("start_seed"), "start_seed");
    const Json& s = o.at("spsa");
    c.opt.spsa.epsilon = detail::auto_or_number(s.at("epsilon"), "spsa.epsilon");
    c.opt.spsa.k_samples = count_field<int>(s.at("k_samples"), "k_samples");
    c.opt.spsa.seed = count_field<std::uint64_t>(s.at("seed"), "spsa.seed");
    c.opt.spsa.perturbation =
        parse_perturbation(s.at("perturbation").get<std::string>());

    const Json& d = j.at("diag");
    c.diag.smoothness_samples = count_field<int>(d.at("smoothness_samples"), "smoothness_samples");
    c.diag.convexity_samples = count_field<int>(d.at("convexity_samples"), "convexity_samples");
    c.diag.rank_samples = count_field<int>(d.at("rank_samples"), "rank_samples");
    c.diag.beta_samples = count_field<int>(d.at("beta_samples"), "beta_samples");
    c.diag.covariance_trials = count_field<int>(d.at("covariance_trials"), "covariance_trials");
    c.diag.covariance_anchors = count_field<int>(d.at("covariance_anchors"), "covariance_anchors");
    c.diag.seed = count_field<std::uint64_t>(d.at("seed"), "diag.seed");

    const Json& v = j.at("verify");
    c.verify.fd_points = count_field<int>(v.at("fd_points"), "fd_points");
    c.verify.rank_samples = count_field<int>(v.at("rank_samples"), "rank_samples");
    c.verify.spsa_trials = count_field<int>(v.at("spsa_trials"), "spsa_trials");
    c.verify.second_moment_trials = count_field<int>(v.at("second_moment_trials"), "second_moment_trials");
    c.verify.descent_anchors = count_field<int>(v.at("descent_anchors"), "descent_anchors");
    c.verify.descent_reps = count_field<int>(v.at("descent_reps"), "descent_reps");
    c.verify.moment_trials = count_field<int>(v.at("moment_trials"), "moment_trials");
    c.verify.fact_rounds = count_field<int>(v.at("fact_rounds"), "fact_rounds");

    const Json& out = j.at("output");
    c.out_dir = out.at("dir").get<std::string>();
    c.force = out.at("force").get<bool>();
    c.opt.record_timing = out.at("record_timing").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

/// Sets a dotted path such as "opt.batch_size" in a config document. The
/// value is read as JSON when it parses, otherwise as a string.
inline void apply_override(Json& doc, const std::string& key,
                           const std::string& value) {
  if (key.empty()) throw ConfigError("empty override key");
  Json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("cannot override '" + key + "'");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = Json::object();
  }
  if (!node->is_object()) throw ConfigError("cannot override '" + key + "'");
  Json parsed = Json::parse(value, nullptr, false);
  (*node)[parts.back()] = parsed.is_discarded() ? Json(value) : parsed;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("'" + path + "' is not valid JSON");
  return j;
}

// ---------------------------------------------------------------- outputs ---

class OutputDir {
 public:
  OutputDir(std::string dir, bool force) : dir_(std::move(dir)), force_(force) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory '" + dir_ + "'");
  }

  /// Opens {dir}/name for writing; refuses to overwrite without force.
  std::ofstream open(const std::string& name) const {
    const auto path = std::filesystem::path(dir_) / name;
    if (std::filesystem::exists(path) && !force_) {
      throw Error("'" + path.string() + "' exists (use --force to overwrite)");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
  }

  void write_json(const std::string& name, const Json& j) const {
    auto out = open(name);
    out << j.dump(2) << '\n';
    if (!out) throw Error("write to '" + name + "' failed");
  }

 private:
  std::string dir_;
  bool force_;
};

// --------------------------------------------------------------- instance ---

inline ProblemData problem_data(const ExperimentConfig& c) {
  ProblemData d;
  if (c.problem_inline) {
    d = problem_data_from_json(*c.problem_inline);
  } else {
    const SoftmaxProblem p = generate_instance(c.generator);
    d.blocks = p.blocks();
    d.w = p.reg_weights();
    d.radius = p.radius();
  }
  if (c.inject_bad_b) d.blocks.front().b.array() += 1.0;
  return d;
}

inline SoftmaxProblem build_problem(const ExperimentConfig& c) {
  return problem_data(c).build();
}

/// Diagnostics needed before a run: L*, l_emp, mu_cert, alpha and the
/// step size. The optimizer itself is not run.
inline DiagnosticsReport pre_run_diagnostics(const SoftmaxProblem& p,
                                             const ExperimentConfig& c,
                                             const Vector& x0) {
  c.opt.validate(p.n_blocks());
  return diagnose(p, c.diag, c.opt, x0, false);
}

inline OptConfig resolved_opt(const ExperimentConfig& c,
                              const DiagnosticsReport& r) {
  OptConfig cfg = c.opt;
  if (!cfg.eta) {
    if (!(r.eta_auto > 0.0)) {
      throw DiagnosticsError(
          "eta is 'auto' but mu_cert <= 0 certifies nothing; set opt.eta");
    }
    cfg.eta = r.eta_auto;
  }
  return cfg;
}

// --------------------------------------------------------------- commands ---

inline int cmd_generate(const ExperimentConfig& c) {
  const SoftmaxProblem p = build_problem(c);
  OutputDir(c.out_dir, c.force).write_json("problem.json", problem_to_json(p));
  return 0;
}

inline int cmd_diagnose(const ExperimentConfig& c) {
  const SoftmaxProblem p = build_problem(c);
  c.opt.validate(p.n_blocks());
  const Vector x0 = start_point(p, c.start, c.start_seed);
  const DiagnosticsReport r = diagnose(p, c.diag, c.opt, x0, true);
  OutputDir(c.out_dir, c.force).write_json("diagnostics.json", report_to_json(r));
  return 0;
}

inline Json run_summary(const RunTrace& t, const DiagnosticsReport& r,
                        const OptConfig& cfg) {
  Json s;
  s["status"] = t.status == RunStatus::kConverged ? "converged" : "max_iters";
  s["mode"] = to_string(cfg.mode);
  s["iterations"] = t.iterations();
  s["final_loss"] = json_number(t.records.back().loss);
  s["final_gap"] = json_number(t.records.back().loss_gap);
  s["L_star"] = json_number(r.L_star);
  s["L0_gap"] = json_number(t.records.front().loss_gap);
  s["eta"] = json_number(*cfg.eta);
  s["batch_size"] = cfg.batch_size;
  s["k_samples"] = cfg.spsa.k_samples;
  s["max_x_norm"] = json_number(t.max_x_norm);
  s["decay_factor"] = json_number(fit_decay_factor(t));
  s["T_observed"] = t.status == RunStatus::kConverged
                        ? Json(t.iterations())
                        : Json(nullptr);
  s["T_theory_log"] = json_number(r.T_theory_log);
  s["T_emp_log"] = json_number(r.T_emp_log);
  s["gamma"] = json_number(r.gamma);
  s["mu_cert"] = json_number(r.mu_cert);
  s["l_emp"] = json_number(r.l_emp);
  s["alpha_emp"] = json_number(r.alpha_emp);
  return s;
}

/// Exit 0 when the target gap was reached, 2 when max_iters ran out.
inline int cmd_run(const ExperimentConfig& c) {
  const SoftmaxProblem p = build_problem(c);
  const Vector x0 = start_point(p, c.start, c.start_seed);
  const DiagnosticsReport r = pre_run_diagnostics(p, c, x0);
  const OptConfig cfg = resolved_opt(c, r);
  const OutputDir out(c.out_dir, c.force);

  RunTrace trace;
  try {
    trace = run(p, x0, cfg, r.L_star);
  } catch (const RunDivergedError& e) {
    auto csv = out.open("trace.csv");
    write_trace_csv(e.trace, csv);
    throw;
  }
  {
    auto csv = out.open("trace.csv");
    write_trace_csv(trace, csv);
  }
  out.write_json("summary.json", run_summary(trace, r, cfg));
  return trace.status == RunStatus::kConverged ? 0 : 2;
}

// ----------------------------------------------------------------- verify ---

struct CheckResult {
  std::string name;
  bool pass = false;
  Json detail = Json::object();
};

/// Runs the property suite on the configured instance. A construction
/// failure is reported as the only (failed) check.
inline std::vector<CheckResult> verify_suite(const ExperimentConfig& c) {
  std::vector<CheckResult> out;
  std::optional<SoftmaxProblem> built;
  {
    CheckResult r{"construction_invariants"};
    try {
      built.emplace(build_problem(c));
      r.pass = true;
    } catch (const InputError& e) {
      r.detail["error"] = e.what();
    }
    out.push_back(std::move(r));
    if (!built) return out;
  }
  const SoftmaxProblem& p = *built;
  const VerifyConfig& v = c.verify;
  const std::uint64_t seed = c.diag.seed;
  const double two_n_plus_2 = 2.0 * static_cast<double>(p.n_rows()) + 2.0;
  const auto full = full_batch(p);
  const auto points = sample_ball_points(p, seed, v.fd_points, 71);

  {
    CheckResult r{"softmax_simplex"};
    double worst = 0.0;
    for (const auto& x : points) {
      for (std::size_t j = 0; j < p.n_blocks(); ++j) {
        const auto s = softmax_block(p, j, x);
        worst = std::max(worst, std::abs(s.f.sum() - 1.0));
        if (!((s.f.array() > 0.0).all())) worst = kInf;
      }
    }
    r.detail["max_sum_error"] = json_number(worst);
    r.pass = worst <= kSimplexTol;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"gradient_oracle"};
    double worst = 0.0;
    for (const auto& x : points) {
      const Vector fd = fd_gradient_oracle(
          [&](const Vector& y) { return loss_total(p, y); }, x,
          fd_gradient_step(x));
      const Vector g = grad_total(p, x);
      worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-300));
    }
    r.detail["max_rel_error"] = json_number(worst);
    r.pass = worst <= 1e-6;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"hessian_oracle"};
    double worst = 0.0;
    for (const auto& x : points) {
      const Matrix fd = fd_jacobian_oracle(
          [&](const Vector& y) { return grad_total(p, y); }, x,
          fd_hessian_step(x));
      worst = std::max(worst, (hessian_total(p, x) - fd).cwiseAbs().maxCoeff());
    }
    r.detail["max_abs_error"] = json_number(worst);
    r.pass = worst <= 1e-4;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"rank_bounds"};
    int max_rank = 0;
    double max_srank = 0.0;
    bool erank_ok = true;
    for (const auto& x : sample_ball_points(p, seed, v.rank_samples, 72)) {
      for (std::size_t j = 0; j < p.n_blocks(); ++j) {
        const Matrix B = hessian_block(p, j, x).B;
        max_rank = std::max(max_rank, numerical_rank(B));
        if (spectral_norm(B) > 1e-14) {
          max_srank = std::max(max_srank, stable_rank(B));
        }
      }
      erank_ok = erank_ok && erank_bound_check(p, x).holds;
    }
    r.detail["max_rank"] = max_rank;
    r.detail["max_srank"] = json_number(max_srank);
    r.detail["bound"] = json_number(two_n_plus_2);
    r.detail["erank_bound_holds"] = erank_ok;
    r.pass = max_rank <= two_n_plus_2 && max_srank <= two_n_plus_2 && erank_ok;
    out.push_back(std::move(r));
  }

  const DiagnosticsReport diag =
      diagnose(p, c.diag, c.opt, start_point(p, c.start, c.start_seed), false);
  const Vector anchor = sample_ball_points(p, seed, 1, 73).front();
  {
    CheckResult r{"spsa_unbiased"};
    const auto m = spsa_mean_check(p, anchor, full, c.opt.spsa, v.spsa_trials,
                                   c.opt.loss);
    r.detail["rel_error"] = json_number(m.rel_error);
    r.pass = m.rel_error <= 0.05;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"spsa_sq_norm"};
    const auto m = sq_norm_ratio_check(p, anchor, full, c.opt.spsa,
                                       v.spsa_trials, c.opt.loss);
    r.detail["ratio"] = json_number(m.ratio);
    r.detail["expected"] = json_number(m.expected);
    r.pass = std::abs(m.ratio - m.expected) <= 0.05 * m.expected;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"spsa_second_moment"};
    const auto m = second_moment_check(p, anchor, p.n_blocks(), c.opt.spsa,
                                       v.second_moment_trials);
    r.detail["max_rel_deviation_exact"] = json_number(m.dev_exact);
    r.detail["max_rel_deviation_isotropic_1_over_d"] = json_number(m.dev_stated);
    r.pass = m.dev_exact <= 0.05;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"descent_inequality"};
    const double eta = c.opt.eta ? *c.opt.eta : diag.eta_auto;
    bool ok = eta > 0.0;
    double worst_margin = -kInf;
    if (ok) {
      for (const auto& x :
           sample_ball_points(p, seed, v.descent_anchors, 74)) {
        const auto d = descent_check(p, x, eta, p.n_blocks(), c.opt.spsa,
                                     diag.l_emp, diag.gamma, v.descent_reps);
        worst_margin = std::max(worst_margin,
                                (d.mean_change - d.bound) / d.std_error);
        ok = ok && d.holds;
      }
    }
    r.detail["eta"] = json_number(eta);
    r.detail["worst_margin_std_errors"] = json_number(worst_margin);
    r.pass = ok;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"strong_convexity"};
    r.detail["mu_cert"] = json_number(diag.mu_cert);
    r.detail["mu_emp"] = json_number(diag.mu_emp);
    r.pass = diag.mu_cert > 0.0 && diag.mu_emp >= diag.mu_cert - 1e-8;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"pl_inequality"};
    if (diag.mu_cert > 0.0) {
      const OptConfig cfg = resolved_opt(c, diag);
      OptConfig quiet = cfg;
      quiet.record_timing = false;
      const Vector x0 = start_point(p, c.start, c.start_seed);
      const auto trace = run(p, x0, quiet, diag.L_star);
      const auto pl = pl_check(trace, diag.L_star, diag.mu_cert);
      r.detail["min_ratio"] = json_number(pl.min_ratio);
      r.detail["checked"] = pl.checked;
      r.detail["iterations"] = trace.iterations();
      r.pass = pl.holds && pl.checked > 0;
    }
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"covariance_structure"};
    const auto ids = batch_moment_identities(p, anchor, c.opt.batch_size,
                                             v.moment_trials, seed);
    const double zero_full =
        minibatch_covariance(p, anchor, p.n_blocks()).cwiseAbs().maxCoeff();
    bool alpha_ok = true;
    for (const auto& x : sample_ball_points(p, seed, 3, 75)) {
      const auto cov = covariance_trace_check(p, x, c.opt.batch_size,
                                              diag.L_star, c.diag.covariance_trials,
                                              seed);
      if (!cov.degenerate) alpha_ok = alpha_ok && std::isfinite(cov.alpha_emp);
    }
    const double scale = per_block_gradients(p, anchor).squaredNorm();
    r.detail["part1_residual"] = json_number(ids.part1_residual);
    r.detail["part2_rel_error"] = json_number(ids.part2_rel_error);
    r.detail["part3_rel_error"] = json_number(ids.part3_rel_error);
    r.detail["part3_min_eig"] = json_number(ids.part3_min_eig);
    r.detail["full_batch_sigma_max_abs"] = json_number(zero_full);
    r.detail["alpha_emp"] = json_number(diag.alpha_emp);
    r.detail["assumption_eps"] = json_number(diag.assumption_eps);
    r.pass = ids.part1_residual <= 1e-10 * std::max(1.0, scale) &&
             ids.part2_rel_error <= 0.02 && ids.part3_rel_error <= 0.02 &&
             ids.part3_min_eig >= -1e-8 && zero_full == 0.0 && alpha_ok;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"partition_lower_bound"};
    const auto b = beta_check(p, c.diag.beta_samples, seed);
    r.detail["min_log_partition"] = json_number(b.min_log_partition);
    r.detail["log_bound"] = json_number(b.log_bound);
    r.pass = b.holds;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"smoothness_bound"};
    r.detail["l_emp"] = json_number(diag.l_emp);
    r.detail["l_theory_log"] = json_number(diag.l_theory_log);
    r.pass = std::log(diag.l_emp) <= diag.l_theory_log;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"report_finite"};
    const Json rep = report_to_json(diag);
    bool ok = diag.gamma >= 1.0 && diag.mu_cert <= diag.mu_emp + 1e-8;
    for (const auto& [key, value] : rep.items()) {
      if (key == "T_observed") continue;
      if (value.is_null()) {
        ok = false;
        r.detail["null_field"] = key;
      }
    }
    r.pass = ok;
    out.push_back(std::move(r));
  }
  {
    CheckResult r{"matrix_facts"};
    int failures = 0;
    for (int i = 0; i < v.fact_rounds; ++i) {
      for (const auto& f :
           matrix_fact_round(seed, static_cast<std::uint64_t>(i))) {
        if (!f.holds) {
          ++failures;
          r.detail["failed"].push_back(f.name);
        }
      }
    }
    r.detail["rounds"] = v.fact_rounds;
    r.pass = failures == 0;
    out.push_back(std::move(r));
  }
  return out;
}

/// Exit 0 iff every check passes.
inline int cmd_verify(const ExperimentConfig& c) {
  if (!c.problem_inline && c.generator.radius < 4.0) {
    throw ConfigError("verify runs the large-radius checks; needs radius >= 4");
  }
  const auto checks = verify_suite(c);
  Json j;
  bool all = true;
  Json arr = Json::array();
  for (const auto& ch : checks) {
    Json e;
    e["name"] = ch.name;
    e["pass"] = ch.pass;
    e["detail"] = ch.detail;
    arr.push_back(std::move(e));
    all = all && ch.pass;
  }
  j["all_pass"] = all;
  j["checks"] = std::move(arr);
  OutputDir(c.out_dir, c.force).write_json("verify.json", j);
  return all ? 0 : 1;
}

}  // namespace zospsa

#endif  // ZOSPSA_HARNESS_HPP_
