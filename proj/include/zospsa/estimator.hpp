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

// SPSA and k-SPSA gradient estimates built from loss evaluations only.
//
//   g_hat(x) = (1/k) sum_i (L(x + eps p_i) - L(x - eps p_i)) / (2 eps) * p_i
//
// Perturbations are regenerated from (seed, iteration, sample) whenever they
// are needed, so an estimate never stores a perturbation vector: the +eps
// and -eps evaluations and the final accumulation each replay the stream.
// Two perturbation laws are supported, both with E[p p^T] = I:
//
//   kSphere    Gaussian draw rescaled to norm sqrt(d). Gives the exact
//              k-SPSA moment identity E||g_hat||^2 = (d+k-1)/k ||grad||^2.
//   kGaussian  i.i.d. N(0, 1) entries; the same moment is (d+k+1)/k.

#ifndef ZOSPSA_ESTIMATOR_HPP_
#define ZOSPSA_ESTIMATOR_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zospsa/calculus.hpp"
#include "zospsa/errors.hpp"
#include "zospsa/linalg.hpp"
#include "zospsa/model.hpp"
#include "zospsa/rng.hpp"
#include "zospsa/sampling.hpp"

namespace zospsa {

enum class PerturbationKind { kSphere, kGaussian };

inline std::string to_string(PerturbationKind kind) {
  return kind == PerturbationKind::kSphere ? "sphere" : "gaussian";
}

inline PerturbationKind parse_perturbation(const std::string& name) {
  if (name == "sphere") return PerturbationKind::kSphere;
  if (name == "gaussian") return PerturbationKind::kGaussian;
  throw ConfigError("unknown perturbation kind '" + name + "'");
}

struct SpsaConfig {
  /// Perturbation scale; unset means 1e-4 * (1 + ||x||_2).
  std::optional<double> epsilon;
  int k_samples = 1;
  std::uint64_t seed = 0;
  PerturbationKind perturbation = PerturbationKind::kSphere;

  void validate() const {
    if (epsilon && !(*epsilon > 0.0 && std::isfinite(*epsilon))) {
      throw ConfigError("spsa epsilon must be positive");
    }
    if (k_samples < 1) throw ConfigError("spsa k_samples must be >= 1");
  }

  double epsilon_at(const Vector& x) const {
    return epsilon ? *epsilon : 1e-4 * (1.0 + x.norm());
  }
};

struct Estimate {
  Vector g_hat;
  std::vector<std::size_t> batch;
  std::uint64_t evals = 0;  // always 2 * k_samples
  double epsilon = 0.0;
  std::uint64_t iteration = 0;
};

/// Position of one perturbation in the counter space.
struct PerturbationStream {
  CounterRng rng;
  std::uint64_t iteration = 0;
  std::uint64_t sample = 0;

  std::uint64_t id() const {
    return stream_id(StreamTag::kPerturbation, iteration, sample);
  }
};

/// Raw i.i.d. standard normal draw for one stream position.
inline Vector sample_perturbation(const PerturbationStream& s,
                                  std::size_t dim) {
  return gaussian_vector(s.rng, s.id(), dim);
}

/// Factor applied to the raw normal draw: 1 for Gaussian, sqrt(d)/||z||
/// for the sphere. Computed by streaming, without materializing z.
inline double perturbation_scale(const PerturbationStream& s, std::size_t dim,
                                 PerturbationKind kind) {
  if (kind == PerturbationKind::kGaussian) return 1.0;
  const auto id = s.id();
  double sq = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double z = s.rng.normal(id, i);
    sq += z * z;
  }
  return std::sqrt(static_cast<double>(dim) / sq);
}

inline Vector perturbation_direction(const PerturbationStream& s,
                                     std::size_t dim, PerturbationKind kind) {
  return sample_perturbation(s, dim) * perturbation_scale(s, dim, kind);
}

/// k-SPSA estimate of the gradient of a scalar objective at x. `iteration`
/// selects a disjoint block of k perturbation streams.
template <typename Objective>
Estimate spsa_estimate(Objective&& objective, const Vector& x,
                       const SpsaConfig& cfg, std::uint64_t iteration = 0) {
  cfg.validate();
  if (!x.allFinite()) throw InputError("x must be finite");
  const auto dim = static_cast<std::size_t>(x.size());
  const double eps = cfg.epsilon_at(x);

  Estimate est;
  est.g_hat = Vector::Zero(x.size());
  est.epsilon = eps;
  est.iteration = iteration;

  Vector work(x.size());
  for (int s = 0; s < cfg.k_samples; ++s) {
    const PerturbationStream stream{CounterRng(cfg.seed), iteration,
                                    static_cast<std::uint64_t>(s)};
    const auto id = stream.id();
    const double scale = perturbation_scale(stream, dim, cfg.perturbation);
    auto coord = [&](std::size_t i) { return scale * stream.rng.normal(id, i); };

    for (std::size_t i = 0; i < dim; ++i) {
      work(static_cast<Eigen::Index>(i)) =
          x(static_cast<Eigen::Index>(i)) + eps * coord(i);
    }
    const double up = objective(static_cast<const Vector&>(work));
    for (std::size_t i = 0; i < dim; ++i) {
      work(static_cast<Eigen::Index>(i)) =
          x(static_cast<Eigen::Index>(i)) - eps * coord(i);
    }
    const double down = objective(static_cast<const Vector&>(work));
    est.evals += 2;

    const double projected = (up - down) / (2.0 * eps);
    for (std::size_t i = 0; i < dim; ++i) {
      est.g_hat(static_cast<Eigen::Index>(i)) += projected * coord(i);
    }
  }
  est.g_hat /= static_cast<double>(cfg.k_samples);
  return est;
}

/// SPSA estimate of the gradient of the batched softmax loss.
inline Estimate spsa_estimate(const SoftmaxProblem& p, const Vector& x,
                              std::span<const std::size_t> batch,
                              const SpsaConfig& cfg,
                              std::uint64_t iteration = 0,
                              LossOptions opts = {}) {
  check_batch(p, batch);
  require_finite(x, p.dim());
  Estimate est = spsa_estimate(
      [&](const Vector& y) { return loss_total(p, y, batch, opts); }, x, cfg,
      iteration);
  est.batch.assign(batch.begin(), batch.end());
  return est;
}

/// Closed-form E||g_hat||^2 / ||grad||^2 for k-SPSA at a fixed batch.
inline double expected_sq_norm_ratio(std::size_t d, int k,
                                     PerturbationKind kind) {
  const double dd = static_cast<double>(d);
  const double kk = static_cast<double>(k);
  return kind == PerturbationKind::kSphere ? (dd + kk - 1.0) / kk
                                           : (dd + kk + 1.0) / kk;
}

struct SqNormRatio {
  double ratio = 0.0;       // mean ||g_hat||^2 / ||grad||^2
  double std_error = 0.0;   // standard error of the ratio
  double expected = 0.0;    // closed form for the configured law
};

/// Monte-Carlo E||g_hat||^2 / ||grad L(x; batch)||^2 with the batch held
/// fixed, so only the perturbations are random.
inline SqNormRatio sq_norm_ratio_check(const SoftmaxProblem& p,
                                       const Vector& x,
                                       std::span<const std::size_t> batch,
                                       const SpsaConfig& cfg, int trials,
                                       LossOptions opts = {}) {
  if (trials < 10000) throw ConfigError("sq_norm_ratio_check needs >= 1e4 trials");
  const double grad_sq = grad_total(p, x, batch, opts).squaredNorm();
  if (!(grad_sq > 0.0)) {
    throw DegenerateInputError("gradient vanishes; ratio undefined");
  }
  double mean = 0.0, m2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double v =
        spsa_estimate(p, x, batch, cfg, static_cast<std::uint64_t>(t), opts)
            .g_hat.squaredNorm() /
        grad_sq;
    const double delta = v - mean;
    mean += delta / (t + 1);
    m2 += delta * (v - mean);
  }
  SqNormRatio out;
  out.ratio = mean;
  out.std_error = std::sqrt(m2 / (trials - 1) / trials);
  out.expected = expected_sq_norm_ratio(p.dim(), cfg.k_samples, cfg.perturbation);
  return out;
}

struct SpsaMeanCheck {
  Vector mean;            // Monte-Carlo E[g_hat]
  double rel_error = 0.0; // ||mean - grad|| / ||grad||
};

/// Monte-Carlo mean of the estimate at a fixed batch against the analytic
/// batch gradient.
inline SpsaMeanCheck spsa_mean_check(const SoftmaxProblem& p, const Vector& x,
                                     std::span<const std::size_t> batch,
                                     const SpsaConfig& cfg, int trials,
                                     LossOptions opts = {}) {
  if (trials < 10000) throw ConfigError("spsa_mean_check needs >= 1e4 trials");
  const Vector grad = grad_total(p, x, batch, opts);
  if (!(grad.norm() > 0.0)) {
    throw DegenerateInputError("gradient vanishes; relative error undefined");
  }
  SpsaMeanCheck out;
  out.mean = Vector::Zero(x.size());
  for (int t = 0; t < trials; ++t) {
    out.mean +=
        spsa_estimate(p, x, batch, cfg, static_cast<std::uint64_t>(t), opts)
            .g_hat;
  }
  out.mean /= static_cast<double>(trials);
  out.rel_error = (out.mean - grad).norm() / grad.norm();
  return out;
}

/// Exact minibatch gradient covariance Sigma(x) = B * Cov[g_B], where
/// g_B = (n/B) sum_{j in batch} a_j is the unbiased minibatch gradient and
/// batches are drawn uniformly without replacement. Finite-population form:
/// Sigma = n^2 (n - B) / (n - 1) * S with S the population covariance of
/// the per-block gradients a_j.
inline Matrix minibatch_covariance(const SoftmaxProblem& p, const Vector& x,
                                   std::size_t batch_size) {
  const std::size_t n = p.n_blocks();
  if (batch_size == 0 || batch_size > n) throw InputError("bad batch size");
  const auto d = static_cast<Eigen::Index>(p.dim());
  if (n == 1 || batch_size == n) return Matrix::Zero(d, d);
  const Matrix a = per_block_gradients(p, x);
  const Vector mean = a.rowwise().mean();
  const Matrix centered = a.colwise() - mean;
  const Matrix S = centered * centered.transpose() / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  return nn * nn * (nn - static_cast<double>(batch_size)) / (nn - 1.0) * S;
}

/// Monte-Carlo version of minibatch_covariance, centred on the exact mean
/// grad L(x). Full batches contribute exactly zero.
inline Matrix minibatch_covariance_mc(const SoftmaxProblem& p, const Vector& x,
                                      std::size_t batch_size,
                                      const CounterRng& rng, int trials) {
  if (trials < 1) throw ConfigError("trials must be positive");
  const std::size_t n = p.n_blocks();
  const Matrix a = per_block_gradients(p, x);
  const Vector full = a.rowwise().sum();
  const double scale =
      static_cast<double>(n) / static_cast<double>(batch_size);
  const auto d = static_cast<Eigen::Index>(p.dim());
  Matrix acc = Matrix::Zero(d, d);
  for (int t = 0; t < trials; ++t) {
    const auto batch =
        sample_batch(rng, static_cast<std::uint64_t>(t), n, batch_size);
    Vector g = Vector::Zero(d);
    for (auto j : batch) g += a.col(static_cast<Eigen::Index>(j));
    const Vector dev = scale * g - full;
    acc += dev * dev.transpose();
  }
  return static_cast<double>(batch_size) * acc / static_cast<double>(trials);
}

/// Exact E[g_hat g_hat^T] for k-SPSA given M = E[g_B g_B^T]:
/// (1 + (c2 - 1)/k) M + (c1/k) tr(M) I, with (c1, c2) = (d/(d+2), 2d/(d+2))
/// on the sphere and (1, 2) for Gaussian perturbations.
inline Matrix second_moment_exact(const Matrix& M, int k,
                                  PerturbationKind kind) {
  const double d = static_cast<double>(M.rows());
  const double kk = static_cast<double>(k);
  const double c1 = kind == PerturbationKind::kSphere ? d / (d + 2.0) : 1.0;
  const double c2 =
      kind == PerturbationKind::kSphere ? 2.0 * d / (d + 2.0) : 2.0;
  return (1.0 + (c2 - 1.0) / kk) * M +
         (c1 / kk) * M.trace() * Matrix::Identity(M.rows(), M.cols());
}

/// The second-moment model (1 + 1/d) M + (1/d) tr(M) I, with
/// M = grad grad^T + Sigma / B.
inline Matrix second_moment_stated(const Matrix& M) {
  const double d = static_cast<double>(M.rows());
  return (1.0 + 1.0 / d) * M +
         (1.0 / d) * M.trace() * Matrix::Identity(M.rows(), M.cols());
}

/// Largest entrywise deviation normalized by the largest model entry.
inline double max_relative_deviation(const Matrix& empirical,
                                     const Matrix& model) {
  const double scale = model.cwiseAbs().maxCoeff();
  const double dev = (empirical - model).cwiseAbs().maxCoeff();
  if (scale == 0.0) return dev == 0.0 ? 0.0 : INFINITY;
  return dev / scale;
}

struct SecondMomentReport {
  Matrix empirical;      // Monte-Carlo E[g_hat g_hat^T]
  Matrix batch_moment;   // M = grad grad^T + Sigma / B
  Matrix stated_model;   // second_moment_stated(M)
  Matrix exact_model;    // second_moment_exact(M, k, law)
  double dev_stated = 0.0;
  double dev_exact = 0.0;
  double mean_sq_norm = 0.0;  // mean ||g_hat||^2 over trials
};

/// Monte-Carlo E[g_hat g_hat^T] with a fresh batch and fresh perturbations
/// per trial. The batch estimate is rescaled by n/B so it is unbiased for
/// grad L(x).
inline SecondMomentReport second_moment_check(const SoftmaxProblem& p,
                                              const Vector& x,
                                              std::size_t batch_size,
                                              const SpsaConfig& cfg,
                                              int trials) {
  if (trials < 100000) {
    throw ConfigError("second_moment_check needs >= 1e5 trials");
  }
  const std::size_t n = p.n_blocks();
  const auto d = static_cast<Eigen::Index>(p.dim());
  const CounterRng batch_rng(splitmix64(cfg.seed ^ 0xB47C4ull));
  const double scale = static_cast<double>(n) / static_cast<double>(batch_size);

  Matrix acc = Matrix::Zero(d, d);
  double sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto batch =
        sample_batch(batch_rng, static_cast<std::uint64_t>(t), n, batch_size);
    const Vector g =
        scale * spsa_estimate(p, x, batch, cfg, static_cast<std::uint64_t>(t))
                    .g_hat;
    acc.noalias() += g * g.transpose();
    sq += g.squaredNorm();
  }

  SecondMomentReport rep;
  rep.empirical = acc / static_cast<double>(trials);
  rep.mean_sq_norm = sq / static_cast<double>(trials);
  const Vector grad = grad_total(p, x);
  const Matrix sigma = minibatch_covariance(p, x, batch_size);
  rep.batch_moment =
      grad * grad.transpose() + sigma / static_cast<double>(batch_size);
  rep.stated_model = second_moment_stated(rep.batch_moment);
  rep.exact_model =
      second_moment_exact(rep.batch_moment, cfg.k_samples, cfg.perturbation);
  rep.dev_stated = max_relative_deviation(rep.empirical, rep.stated_model);
  rep.dev_exact = max_relative_deviation(rep.empirical, rep.exact_model);
  return rep;
}

}  // namespace zospsa

#endif  // ZOSPSA_ESTIMATOR_HPP_
