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

// Constants of the ZO-SGD convergence analysis evaluated on a concrete
// instance, and numerical checks of each inequality it relies on.
//
// Anything involving exp(5 R^2) is carried in log space; those constants
// overflow double precision for R >= 6.

#ifndef ZOSPSA_DIAGNOSTICS_HPP_
#define ZOSPSA_DIAGNOSTICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "zospsa/calculus.hpp"
#include "zospsa/errors.hpp"
#include "zospsa/estimator.hpp"
#include "zospsa/linalg.hpp"
#include "zospsa/model.hpp"
#include "zospsa/optimizer.hpp"
#include "zospsa/rng.hpp"
#include "zospsa/sampling.hpp"

namespace zospsa {

/// Upper bound on the negative curvature of B_j over the probability
/// simplex: B_j >= -kExpCurvatureBound * I for every f and every b >= 0
/// with ||b||_1 <= 1. The supremum is about 0.24041, attained with two rows
/// and b at a vertex; the bound is validated numerically in the tests.
inline constexpr double kExpCurvatureBound = 0.25;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- ranks ---

/// ||M||_F^2 / ||M||^2.
inline double stable_rank(const Matrix& M) {
  const double s = spectral_norm(M);
  if (!(s > 0.0)) throw DegenerateInputError("stable rank of zero matrix");
  return M.squaredNorm() / (s * s);
}

/// tr(M) / ||M|| for a PSD matrix.
inline double effective_rank(const Matrix& M) {
  if (M.rows() != M.cols()) throw InputError("effective rank needs square M");
  const Vector ev = sym_eigenvalues(M);
  if (ev(0) < -1e-10) throw InputError("effective rank needs PSD M");
  const double top = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  if (!(top > 0.0)) throw DegenerateInputError("effective rank of zero matrix");
  return M.trace() / top;
}

/// tr(M) / ||M|| without the PSD requirement.
inline double trace_norm_ratio(const Matrix& M) {
  const double top = sym_spectral_norm(M);
  if (!(top > 0.0)) throw DegenerateInputError("trace ratio of zero matrix");
  return M.trace() / top;
}

struct ErankBound {
  double erank = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// erank(A^T B A) <= rank(A) * (||B||_F / ||B||) * kappa(A)^2 for PSD B.
inline ErankBound erank_bound_pair(const Matrix& A, const Matrix& B) {
  ErankBound out;
  const Matrix H = A.transpose() * B * A;
  out.erank = effective_rank(0.5 * (H + H.transpose()));
  const double kappa = condition_number(A);
  const double bn = spectral_norm(B);
  out.bound = std::isfinite(kappa)
                  ? numerical_rank(A) * (B.norm() / bn) * kappa * kappa
                  : kInf;
  out.holds = out.erank <= out.bound * (1.0 + 1e-12);
  return out;
}

struct ErankBoundReport {
  std::vector<ErankBound> blocks;  // per-block H_j = A_j^T B_j(x) A_j
  ErankBound aggregate;            // full Hessian vs d sqrt(2d+2) kappa^2
  bool holds = false;
};

/// Per-block effective-rank bounds at x plus the aggregate bound on the
/// full Hessian. B_j need not be PSD here, so tr/||.|| is used directly.
inline ErankBoundReport erank_bound_check(const SoftmaxProblem& p,
                                          const Vector& x) {
  ErankBoundReport rep;
  rep.holds = true;
  double kappa_max = 1.0;
  for (std::size_t j = 0; j < p.n_blocks(); ++j) {
    const Matrix& A = p.block(j).A;
    const Matrix B = hessian_block(p, j, x).B;
    const Matrix H = A.transpose() * B * A;
    ErankBound eb;
    const double kappa = condition_number(A);
    kappa_max = std::max(kappa_max, kappa);
    const double bn = spectral_norm(B);
    if (!(bn > 0.0) || !(sym_spectral_norm(H) > 0.0)) {
      eb.erank = 0.0;
      eb.bound = kInf;
      eb.holds = true;
    } else {
      eb.erank = trace_norm_ratio(H);
      eb.bound = std::isfinite(kappa)
                     ? numerical_rank(A) * (B.norm() / bn) * kappa * kappa
                     : kInf;
      eb.holds = eb.erank <= eb.bound * (1.0 + 1e-12);
    }
    rep.holds = rep.holds && eb.holds;
    rep.blocks.push_back(eb);
  }
  const double d = static_cast<double>(p.dim());
  const Matrix H = hessian_total(p, x);
  rep.aggregate.erank = trace_norm_ratio(H);
  rep.aggregate.bound = std::isfinite(kappa_max)
                            ? d * std::sqrt(2.0 * d + 2.0) * kappa_max * kappa_max
                            : kInf;
  rep.aggregate.holds = rep.aggregate.erank <= rep.aggregate.bound;
  rep.holds = rep.holds && rep.aggregate.holds;
  return rep;
}

// ------------------------------------------------------------ constants ---

/// gamma = (d^2 sqrt(2d+2) kappa^2 + d - 2) / (k (d + 2)) + 1.
inline double gamma_factor(double d, double k, double kappa) {
  return (d * d * std::sqrt(2.0 * d + 2.0) * kappa * kappa + d - 2.0) /
             (k * (d + 2.0)) +
         1.0;
}

/// log R_f = 1.5 log n + 5 R^2.
inline double log_R_f(double R, double n_rows) {
  return 1.5 * std::log(n_rows) + 5.0 * R * R;
}

/// log l = log(8 R R_f).
inline double log_l_theory(double R, double n_rows) {
  return std::log(8.0 * R) + log_R_f(R, n_rows);
}

/// max_j kappa(A_j); infinite when some block is rank deficient.
inline double max_block_kappa(const SoftmaxProblem& p) {
  double kappa = 1.0;
  for (std::size_t j = 0; j < p.n_blocks(); ++j) {
    const double s = p.block_sigma_min(j);
    kappa = std::max(kappa, s > 0.0 ? p.block_norm(j) / s : kInf);
  }
  return kappa;
}

inline double max_block_norm(const SoftmaxProblem& p) {
  double R = 0.0;
  for (std::size_t j = 0; j < p.n_blocks(); ++j) {
    R = std::max(R, p.block_norm(j));
  }
  return R;
}

struct IterationBound {
  double log_iterations = 0.0;      // with the given smoothness constant
  bool converged_already = false;   // L0_gap <= eps, zero iterations needed
};

/// log of gamma * max{2l/mu, 2 l alpha/(mu^2 B)} * log(L0_gap / eps),
/// evaluated in log space from log l.
inline IterationBound iteration_bound(double log_l, double mu, double alpha,
                                      std::size_t batch_size, double gamma,
                                      double eps, double L0_gap) {
  if (!(eps > 0.0) || !(L0_gap > 0.0)) {
    throw InputError("iteration_bound needs eps > 0 and L0_gap > 0");
  }
  if (!(mu > 0.0)) throw DiagnosticsError("iteration_bound needs mu > 0");
  IterationBound out;
  const double log_factor = std::log(L0_gap / eps);
  if (log_factor <= 0.0) {
    out.converged_already = true;
    out.log_iterations = -kInf;
    return out;
  }
  const double B = static_cast<double>(batch_size);
  const double a = std::log(2.0) + log_l - std::log(mu);
  const double b = alpha > 0.0 ? std::log(2.0) + log_l + std::log(alpha) -
                                     2.0 * std::log(mu) - std::log(B)
                               : -kInf;
  out.log_iterations = std::log(gamma) + std::max(a, b) + std::log(log_factor);
  return out;
}

// ------------------------------------------------------------- sampling ---

/// Points drawn uniformly from the ball ||x|| <= radius.
inline std::vector<Vector> sample_ball_points(const SoftmaxProblem& p,
                                              std::uint64_t seed, int count,
                                              std::uint64_t salt = 0) {
  const CounterRng rng(seed);
  std::vector<Vector> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    pts.push_back(sample_in_ball(
        rng, stream_id(StreamTag::kSampling, salt, static_cast<std::uint64_t>(i)),
        p.dim(), p.radius()));
  }
  return pts;
}

// ----------------------------------------------------------- smoothness ---

struct SmoothnessEstimate {
  double l_emp = 0.0;
  double max_hessian_norm = 0.0;
  double max_pair_ratio = 0.0;
};

/// Two independent estimates, maximized over sampled points: ||Hess L(x)||
/// from the analytic Hessian, and the local Lipschitz ratio
/// ||grad L(x + u) - grad L(x - u)|| / ||2u|| for a small pair direction u
/// found by power iteration on gradient differences alone.
inline SmoothnessEstimate empirical_smoothness(const SoftmaxProblem& p,
                                               int samples,
                                               std::uint64_t seed = 0) {
  if (samples < 100) throw ConfigError("empirical_smoothness needs >= 100 samples");
  SmoothnessEstimate out;
  const CounterRng rng(seed);
  const auto pts = sample_ball_points(p, seed, samples, 11);
  for (int i = 0; i < samples; ++i) {
    const Vector& x = pts[static_cast<std::size_t>(i)];
    out.max_hessian_norm =
        std::max(out.max_hessian_norm, sym_spectral_norm(hessian_total(p, x)));
    const double h = 1e-4 * (1.0 + x.norm());
    auto pair_ratio = [&](const Vector& dir, Vector& image) {
      image = (grad_total(p, Vector(x + h * dir)) -
               grad_total(p, Vector(x - h * dir))) / (2.0 * h);
      return image.norm();
    };
    Vector u = gaussian_vector(
        rng, stream_id(StreamTag::kSampling, 12, static_cast<std::uint64_t>(i)),
        p.dim());
    u.normalize();
    Vector image;
    double ratio = pair_ratio(u, image);
    for (int it = 0; it < 30 && image.norm() > 0.0; ++it) {
      u = image / image.norm();
      ratio = std::max(ratio, pair_ratio(u, image));
    }
    out.max_pair_ratio = std::max(out.max_pair_ratio, ratio);
  }
  out.l_emp = std::max(out.max_hessian_norm, out.max_pair_ratio);
  return out;
}

// ------------------------------------------------------ strong convexity ---

struct ConvexityCert {
  double mu_cert = 0.0;  // certified lower bound on lambda_min(Hess L)
  double mu_emp = 0.0;   // min sampled lambda_min(Hess L)
  double mu_reg = 0.0;   // lambda_min of the regularizer Hessian alone
};

/// mu_cert = lambda_min(sum_j A_j^T (W^2 - nu I) A_j) with nu the exp-part
/// curvature bound; it may be negative, in which case nothing is certified.
inline ConvexityCert strong_convexity_cert(const SoftmaxProblem& p,
                                           int samples = 50,
                                           std::uint64_t seed = 0) {
  ConvexityCert out;
  const Matrix H_reg = hessian_reg_total(p);
  out.mu_reg = min_eigenvalue(H_reg);
  const auto d = static_cast<Eigen::Index>(p.dim());
  Matrix AtA = Matrix::Zero(d, d);
  for (const auto& blk : p.blocks()) AtA += blk.A.transpose() * blk.A;
  out.mu_cert = min_eigenvalue(H_reg - kExpCurvatureBound * AtA);
  out.mu_emp = kInf;
  for (const auto& x : sample_ball_points(p, seed, samples, 21)) {
    out.mu_emp = std::min(out.mu_emp, min_eigenvalue(hessian_total(p, x)));
  }
  return out;
}

// ------------------------------------------------------------- L* oracle ---

struct MinimizerResult {
  double L_star = 0.0;
  Vector x_star;
  std::int64_t iterations = 0;
  double grad_norm = 0.0;
};

/// Full-batch gradient descent with step 1/l until ||grad|| <= tol or the
/// iteration cap, tracking the best loss seen.
inline MinimizerResult minimize_full_gradient(const SoftmaxProblem& p,
                                              double l, double tol = 1e-12,
                                              std::int64_t max_iters = 1000000) {
  if (!(l > 0.0)) throw DiagnosticsError("minimizer needs l > 0");
  MinimizerResult out;
  Vector x = Vector::Zero(static_cast<Eigen::Index>(p.dim()));
  const double eta = 1.0 / l;
  Vector g = grad_total(p, x);
  std::int64_t it = 0;
  for (; it < max_iters && g.norm() > tol; ++it) {
    x -= eta * g;
    g = grad_total(p, x);
  }
  out.x_star = x;
  out.L_star = loss_total(p, x);
  out.iterations = it;
  out.grad_norm = g.norm();
  return out;
}

// -------------------------------------------------------------- PL check ---

struct PlReport {
  double min_ratio = kInf;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool holds = false;
};

/// min over trace iterates of 0.5 ||grad L||^2 / (L - L*), skipping
/// iterates whose gap is at most 1e-14.
inline PlReport pl_check(const RunTrace& trace, double L_star, double mu_cert) {
  PlReport rep;
  for (const auto& r : trace.records) {
    const double gap = r.loss - L_star;
    if (gap <= 1e-14) {
      ++rep.skipped;
      continue;
    }
    rep.min_ratio = std::min(rep.min_ratio, 0.5 * r.grad_sq / gap);
    ++rep.checked;
  }
  rep.holds = rep.checked == 0 || rep.min_ratio >= mu_cert;
  return rep;
}

// ------------------------------------------------------------ covariance ---

struct CovarianceCheck {
  bool degenerate = false;      // x at the minimizer; skipped
  double gap = 0.0;             // L(x) - L*
  double trace_sigma_mc = 0.0;  // tr Sigma_MC(x)
  double trace_sigma_exact = 0.0;
  double alpha_emp = 0.0;       // tr Sigma_MC / gap
  double assumption_eps = 0.0;  // worst balance deviation over batches
  bool assumption_holds = false;  // assumption_eps <= 1/4
};

/// Monte-Carlo minibatch covariance trace against the loss gap, plus the
/// observed balance deviation || sum_{j in B} a_j a_j^T - (B/n) sum_j a_j a_j^T ||
/// relative to ||(B/n) sum_j a_j a_j^T|| (worst case over sampled batches).
inline CovarianceCheck covariance_trace_check(const SoftmaxProblem& p,
                                              const Vector& x,
                                              std::size_t batch_size,
                                              double L_star, int trials,
                                              std::uint64_t seed = 0) {
  if (trials < 10000) throw ConfigError("covariance check needs >= 1e4 trials");
  CovarianceCheck out;
  out.gap = loss_total(p, x) - L_star;
  if (out.gap <= 1e-14) {
    out.degenerate = true;
    return out;
  }
  const CounterRng rng(seed);
  out.trace_sigma_mc =
      minibatch_covariance_mc(p, x, batch_size, rng, trials).trace();
  out.trace_sigma_exact = minibatch_covariance(p, x, batch_size).trace();
  out.alpha_emp = out.trace_sigma_mc / out.gap;

  const Matrix a = per_block_gradients(p, x);
  const Matrix full = a * a.transpose();
  const double frac = static_cast<double>(batch_size) /
                      static_cast<double>(p.n_blocks());
  const double ref = spectral_norm(frac * full);
  const int batch_draws = std::min(trials, 2000);
  for (int t = 0; t < batch_draws; ++t) {
    const auto batch = sample_batch(rng, static_cast<std::uint64_t>(t),
                                    p.n_blocks(), batch_size);
    Matrix part = Matrix::Zero(a.rows(), a.rows());
    for (auto j : batch) {
      const auto c = a.col(static_cast<Eigen::Index>(j));
      part += c * c.transpose();
    }
    const double dev = ref > 0.0 ? spectral_norm(part - frac * full) / ref : 0.0;
    out.assumption_eps = std::max(out.assumption_eps, dev);
  }
  out.assumption_holds = out.assumption_eps <= 0.25;
  return out;
}

struct BatchMomentIdentities {
  double part1_residual = 0.0;  // exact split of g_B g_B^T, max |.|
  double part2_rel_error = 0.0; // MC mean of diagonal sum vs (B/n) full
  double part3_rel_error = 0.0; // MC cross mean vs exact w/o-replacement mean
  double part3_min_eig = 0.0;   // lambda_min(B(B-1)/n full - E cross)
};

/// Checks the three batch-moment identities for per-block gradients a_j:
///   1. (sum_B a_j)(sum_B a_j)^T = sum_B a_j a_j^T + sum_{i != j in B} a_i a_j^T
///   2. E sum_B a_j a_j^T = (B/n) sum_j a_j a_j^T
///   3. E sum_{i != j in B} a_i a_j^T <= B(B-1)/n sum_j a_j a_j^T (PSD order)
inline BatchMomentIdentities batch_moment_identities(const SoftmaxProblem& p,
                                                     const Vector& x,
                                                     std::size_t batch_size,
                                                     int trials,
                                                     std::uint64_t seed = 0) {
  BatchMomentIdentities out;
  const Matrix a = per_block_gradients(p, x);
  const auto d = a.rows();
  const double n = static_cast<double>(p.n_blocks());
  const double B = static_cast<double>(batch_size);
  const Matrix full = a * a.transpose();
  const Vector total = a.rowwise().sum();
  const CounterRng rng(seed);

  Matrix diag_acc = Matrix::Zero(d, d);
  Matrix cross_acc = Matrix::Zero(d, d);
  for (int t = 0; t < trials; ++t) {
    const auto batch = sample_batch(rng, static_cast<std::uint64_t>(t),
                                    p.n_blocks(), batch_size);
    Vector s = Vector::Zero(d);
    Matrix diag = Matrix::Zero(d, d);
    for (auto j : batch) {
      const auto c = a.col(static_cast<Eigen::Index>(j));
      s += c;
      diag += c * c.transpose();
    }
    Matrix cross = Matrix::Zero(d, d);
    for (auto i : batch) {
      for (auto j : batch) {
        if (i == j) continue;
        cross += a.col(static_cast<Eigen::Index>(i)) *
                 a.col(static_cast<Eigen::Index>(j)).transpose();
      }
    }
    out.part1_residual = std::max(
        out.part1_residual,
        (s * s.transpose() - diag - cross).cwiseAbs().maxCoeff());
    diag_acc += diag;
    cross_acc += cross;
  }
  diag_acc /= static_cast<double>(trials);
  cross_acc /= static_cast<double>(trials);

  const Matrix part2_ref = (B / n) * full;
  out.part2_rel_error = (diag_acc - part2_ref).norm() / part2_ref.norm();

  const Matrix off = total * total.transpose() - full;
  const Matrix cross_exact =
      n > 1.0 ? Matrix((B * (B - 1.0) / (n * (n - 1.0))) * off)
              : Matrix::Zero(d, d);
  const double cross_scale = std::max(cross_exact.norm(), (B / n) * full.norm());
  out.part3_rel_error =
      cross_scale > 0.0 ? (cross_acc - cross_exact).norm() / cross_scale : 0.0;
  out.part3_min_eig =
      min_eigenvalue((B * (B - 1.0) / n) * full - cross_exact);
  return out;
}

// ----------------------------------------------------------------- beta ---

struct BetaCheck {
  double min_log_partition = kInf;
  double log_bound = 0.0;  // -R^2
  bool holds = false;
};

/// log <exp(A_j x), 1> >= -R^2 over sampled x in the radius ball.
inline BetaCheck beta_check(const SoftmaxProblem& p, int samples,
                            std::uint64_t seed = 0) {
  BetaCheck out;
  const double R = p.radius();
  out.log_bound = -R * R;
  for (const auto& x : sample_ball_points(p, seed, samples, 31)) {
    for (std::size_t j = 0; j < p.n_blocks(); ++j) {
      out.min_log_partition =
          std::min(out.min_log_partition, softmax_block(p, j, x).log_partition);
    }
  }
  out.holds = out.min_log_partition >= out.log_bound;
  return out;
}

// -------------------------------------------------------------- descent ---

struct DescentCheck {
  double mean_change = 0.0;  // MC mean of L(x_{t+1}) - L(x_t)
  double std_error = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// Monte-Carlo one-step expected change of L under a ZO step at x against
///   -eta (B/n) ||grad L||^2 + 0.5 eta^2 l gamma E||grad L(x; B)||^2,
/// accepted within three standard errors. With B = n this is the plain
/// descent inequality.
inline DescentCheck descent_check(const SoftmaxProblem& p, const Vector& x,
                                  double eta, std::size_t batch_size,
                                  const SpsaConfig& spsa, double l, double gamma,
                                  int reps) {
  DescentCheck out;
  const double L0 = loss_total(p, x);
  const CounterRng batch_rng(splitmix64(spsa.seed ^ 0xD35Cull));
  double mean = 0.0, m2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto batch = sample_batch(batch_rng, static_cast<std::uint64_t>(r),
                                    p.n_blocks(), batch_size);
    const Vector g =
        spsa_estimate(p, x, batch, spsa, static_cast<std::uint64_t>(r)).g_hat;
    const double v = loss_total(p, Vector(x - eta * g)) - L0;
    const double delta = v - mean;
    mean += delta / (r + 1);
    m2 += delta * (v - mean);
  }
  out.mean_change = mean;
  out.std_error = std::sqrt(m2 / (reps - 1) / reps);

  const double n = static_cast<double>(p.n_blocks());
  const double B = static_cast<double>(batch_size);
  const double grad_sq = grad_total(p, x).squaredNorm();
  const double sigma_tr = minibatch_covariance(p, x, batch_size).trace();
  const double batch_grad_sq = (B / n) * (B / n) * (grad_sq + sigma_tr / B);
  out.bound = -eta * (B / n) * grad_sq + 0.5 * eta * eta * l * gamma * batch_grad_sq;
  out.holds = out.mean_change <= out.bound + 3.0 * out.std_error;
  return out;
}

// --------------------------------------------------------------- report ---

enum class StartKind { kZero, kBall };

inline std::string to_string(StartKind k) {
  return k == StartKind::kZero ? "zero" : "ball";
}

inline StartKind parse_start(const std::string& s) {
  if (s == "zero") return StartKind::kZero;
  if (s == "ball") return StartKind::kBall;
  throw ConfigError("unknown start point '" + s + "'");
}

/// Initial iterate: the origin, or a seeded uniform draw from ||x|| <= R.
inline Vector start_point(const SoftmaxProblem& p, StartKind kind,
                          std::uint64_t seed) {
  if (kind == StartKind::kZero) {
    return Vector::Zero(static_cast<Eigen::Index>(p.dim()));
  }
  const CounterRng rng(seed);
  return sample_in_ball(rng, stream_id(StreamTag::kAnchor, 0x57A7), p.dim(),
                        p.radius());
}

struct DiagOptions {
  int smoothness_samples = 200;
  int convexity_samples = 50;
  int rank_samples = 50;
  int beta_samples = 100;
  int covariance_trials = 10000;
  int covariance_anchors = 5;
  std::uint64_t seed = 0;
};

struct DiagnosticsReport {
  double R = 0.0;
  double log_R_f = 0.0;
  double l_theory_log = 0.0;
  double l_emp = 0.0;
  double mu_cert = 0.0;
  double mu_emp = 0.0;
  double mu_reg = 0.0;
  double beta_log = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double alpha_emp = 0.0;
  double assumption_eps = 0.0;
  double srank_max = 0.0;
  double erank_H = 0.0;
  double L_star = 0.0;
  double L0_gap = 0.0;
  double eta_auto = 0.0;
  std::optional<double> T_theory_log;  // unset when mu_cert <= 0
  std::optional<double> T_emp_log;
  std::int64_t T_observed = -1;        // -1 when no run was performed
};

inline double auto_step_size(const DiagnosticsReport& diag,
                             std::size_t batch_size, double alpha) {
  return auto_step_size(diag.l_emp, diag.mu_cert, batch_size, alpha);
}

/// Evaluates every analysis constant on the instance. L0_gap is measured
/// at x0; with `run_optimizer` the configured optimizer is also run from x0
/// (eta resolved by auto_step_size if unset) to record T_observed.
inline DiagnosticsReport diagnose(const SoftmaxProblem& p,
                                  const DiagOptions& o, const OptConfig& opt,
                                  const Vector& x0, bool run_optimizer = true) {
  require_finite(x0, p.dim());
  DiagnosticsReport r;
  const double n_rows = static_cast<double>(p.n_rows());
  r.R = max_block_norm(p);
  r.log_R_f = log_R_f(r.R, n_rows);
  r.l_theory_log = log_l_theory(r.R, n_rows);
  r.beta_log = -p.radius() * p.radius();
  r.kappa = max_block_kappa(p);
  r.gamma = gamma_factor(static_cast<double>(p.dim()),
                         static_cast<double>(opt.spsa.k_samples), r.kappa);

  r.l_emp = empirical_smoothness(p, o.smoothness_samples, o.seed).l_emp;
  const auto cert = strong_convexity_cert(p, o.convexity_samples, o.seed);
  r.mu_cert = cert.mu_cert;
  r.mu_emp = cert.mu_emp;
  r.mu_reg = cert.mu_reg;

  for (const auto& x : sample_ball_points(p, o.seed, o.rank_samples, 41)) {
    for (std::size_t j = 0; j < p.n_blocks(); ++j) {
      const Matrix B = hessian_block(p, j, x).B;
      if (spectral_norm(B) > 1e-14) {
        r.srank_max = std::max(r.srank_max, stable_rank(B));
      }
    }
    const Matrix H = hessian_total(p, x);
    if (sym_spectral_norm(H) > 0.0) {
      r.erank_H = std::max(r.erank_H, trace_norm_ratio(H));
    }
  }

  const auto minimizer = minimize_full_gradient(p, r.l_emp);
  r.L_star = minimizer.L_star;
  r.L0_gap = loss_total(p, x0) - r.L_star;

  for (const auto& x :
       sample_ball_points(p, o.seed, o.covariance_anchors, 51)) {
    const auto cov = covariance_trace_check(p, x, opt.batch_size, r.L_star,
                                            o.covariance_trials, o.seed);
    if (cov.degenerate) continue;
    r.alpha_emp = std::max(r.alpha_emp, cov.alpha_emp);
    r.assumption_eps = std::max(r.assumption_eps, cov.assumption_eps);
  }

  if (r.mu_cert > 0.0) {
    r.eta_auto = auto_step_size(r, opt.batch_size, r.alpha_emp);
    if (r.L0_gap > 0.0) {
      r.T_theory_log = iteration_bound(r.l_theory_log, r.mu_cert, r.alpha_emp,
                                       opt.batch_size, r.gamma, opt.target_gap,
                                       r.L0_gap)
                           .log_iterations;
      r.T_emp_log = iteration_bound(std::log(r.l_emp), r.mu_cert, r.alpha_emp,
                                    opt.batch_size, r.gamma, opt.target_gap,
                                    r.L0_gap)
                        .log_iterations;
      if (!std::isfinite(*r.T_theory_log)) r.T_theory_log.reset();
      if (r.T_emp_log && !std::isfinite(*r.T_emp_log)) r.T_emp_log.reset();
    }
  }

  if (run_optimizer && (opt.eta || r.eta_auto > 0.0)) {
    OptConfig cfg = opt;
    if (!cfg.eta) cfg.eta = r.eta_auto;
    cfg.record_timing = false;
    try {
      const auto trace = run(p, x0, cfg, r.L_star);
      if (trace.status == RunStatus::kConverged) {
        r.T_observed = static_cast<std::int64_t>(trace.iterations());
      }
    } catch (const DivergenceError&) {
      r.T_observed = -1;
    }
  }
  return r;
}

}  // namespace zospsa

#endif  // ZOSPSA_DIAGNOSTICS_HPP_
