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

// Softmax regression problem and its loss functions.
//
// A problem holds n_blocks data pairs (A_j, b_j) with A_j of shape
// n_rows x dim, plus a diagonal regularizer W = diag(w). For a parameter
// vector x the per-block quantities are
//
//   f_j(x)      = exp(A_j x) / <exp(A_j x), 1>      (softmax of A_j x)
//   c_j(x)      = f_j(x) - b_j
//   L_exp,j(x)  = 0.5 ||c_j(x)||^2
//   L_reg,j(x)  = 0.5 ||W A_j x||^2
//
// and the total loss is the sum over blocks of L_exp,j + L_reg,j. Block
// indices are zero-based.

#ifndef ZOSPSA_MODEL_HPP_
#define ZOSPSA_MODEL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zospsa/errors.hpp"
#include "zospsa/linalg.hpp"

namespace zospsa {

/// Per-thread call counters. Lets tests audit that zeroth-order code paths
/// never touch the analytic gradient.
struct EvalCounters {
  std::uint64_t loss_evals = 0;
  std::uint64_t grad_evals = 0;
};

inline EvalCounters& eval_counters() {
  thread_local EvalCounters counters;
  return counters;
}

struct DataBlock {
  Matrix A;
  Vector b;
};

/// Absolute tolerance used for every probability-simplex check.
inline constexpr double kSimplexTol = 1e-12;

/// Immutable softmax regression instance. The constructor enforces the
/// instance invariants: finite entries, b_j >= 0 entrywise, ||b_j||_1 <= 1
/// and ||A_j|| <= radius for every block.
class SoftmaxProblem {
 public:
  SoftmaxProblem(std::vector<DataBlock> blocks, Vector reg_weights,
                 double radius)
      : blocks_(std::move(blocks)), w_(std::move(reg_weights)), radius_(radius) {
    validate();
    norms_.reserve(blocks_.size());
    sigma_mins_.reserve(blocks_.size());
    for (const auto& blk : blocks_) {
      const Vector s = singular_values(blk.A);
      norms_.push_back(s.size() ? s(0) : 0.0);
      sigma_mins_.push_back(blk.A.rows() >= blk.A.cols() && s.size()
                                ? s(s.size() - 1)
                                : 0.0);
    }
  }

  std::size_t n_blocks() const { return blocks_.size(); }
  std::size_t n_rows() const { return static_cast<std::size_t>(w_.size()); }
  std::size_t dim() const {
    return static_cast<std::size_t>(blocks_.front().A.cols());
  }
  double radius() const { return radius_; }

  const DataBlock& block(std::size_t j) const {
    check_index(j);
    return blocks_[j];
  }
  const std::vector<DataBlock>& blocks() const { return blocks_; }
  const Vector& reg_weights() const { return w_; }

  /// Cached spectral norm ||A_j||.
  double block_norm(std::size_t j) const {
    check_index(j);
    return norms_[j];
  }
  /// Cached sigma_min(A_j); zero when A_j has fewer rows than columns.
  double block_sigma_min(std::size_t j) const {
    check_index(j);
    return sigma_mins_[j];
  }

  void check_index(std::size_t j) const {
    if (j >= blocks_.size()) {
      throw InputError("block index " + std::to_string(j) +
                       " out of range [0, " + std::to_string(blocks_.size()) +
                       ")");
    }
  }

 private:
  void validate() const {
    if (blocks_.empty()) throw InputError("problem needs at least one block");
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
      throw InputError("radius must be positive and finite");
    }
    const auto rows = w_.size();
    if (rows == 0) throw InputError("n_rows must be positive");
    if (!w_.allFinite()) throw InputError("reg weights must be finite");
    const auto cols = blocks_.front().A.cols();
    if (cols == 0) throw InputError("dim must be positive");
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const auto& blk = blocks_[j];
      const std::string tag = "block " + std::to_string(j) + ": ";
      if (blk.A.rows() != rows || blk.A.cols() != cols) {
        throw InputError(tag + "A has inconsistent shape");
      }
      if (blk.b.size() != rows) throw InputError(tag + "b has wrong length");
      if (!blk.A.allFinite() || !blk.b.allFinite()) {
        throw InputError(tag + "non-finite entry");
      }
      if ((blk.b.array() < 0.0).any()) {
        throw InputError(tag + "b must be entrywise nonnegative");
      }
      if (blk.b.sum() > 1.0 + kSimplexTol) {
        throw InputError(tag + "||b||_1 exceeds 1");
      }
      if (spectral_norm(blk.A) > radius_ * (1.0 + 1e-12)) {
        throw InputError(tag + "||A|| exceeds radius");
      }
    }
  }

  std::vector<DataBlock> blocks_;
  Vector w_;
  double radius_;
  std::vector<double> norms_;
  std::vector<double> sigma_mins_;
};

/// Which blocks a batched loss sums over, and whether the regularizer rides
/// along with each selected block.
struct LossOptions {
  bool reg_in_batch = true;
};

struct SoftmaxOutput {
  Vector f;
  double log_partition = 0.0;  // log <exp(u), 1>, unshifted
};

/// Max-shifted softmax of a raw score vector.
inline SoftmaxOutput softmax(const Vector& u) {
  const double shift = u.maxCoeff();
  Vector e = (u.array() - shift).exp().matrix();
  const double z = e.sum();
  return {e / z, shift + std::log(z)};
}

inline void require_finite(const Vector& x, std::size_t dim) {
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw InputError("x has length " + std::to_string(x.size()) +
                     ", expected " + std::to_string(dim));
  }
  if (!x.allFinite()) throw InputError("x must be finite");
}

inline SoftmaxOutput softmax_block(const SoftmaxProblem& p, std::size_t j,
                                   const Vector& x) {
  require_finite(x, p.dim());
  return softmax(p.block(j).A * x);
}

inline Vector residual_block(const SoftmaxProblem& p, std::size_t j,
                             const Vector& x) {
  return softmax_block(p, j, x).f - p.block(j).b;
}

inline double loss_exp_block(const SoftmaxProblem& p, std::size_t j,
                             const Vector& x) {
  return 0.5 * residual_block(p, j, x).squaredNorm();
}

inline double loss_reg_block(const SoftmaxProblem& p, std::size_t j,
                             const Vector& x) {
  require_finite(x, p.dim());
  const Vector wu = p.reg_weights().cwiseProduct(p.block(j).A * x);
  return 0.5 * wu.squaredNorm();
}

/// Every block index, in order.
inline std::vector<std::size_t> full_batch(const SoftmaxProblem& p) {
  std::vector<std::size_t> all(p.n_blocks());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  return all;
}

inline void check_batch(const SoftmaxProblem& p,
                        std::span<const std::size_t> batch) {
  if (batch.empty()) throw InputError("batch must be nonempty");
  for (auto j : batch) p.check_index(j);
}

/// Sum over the batch of L_exp,j (+ L_reg,j when opts.reg_in_batch).
inline double loss_total(const SoftmaxProblem& p, const Vector& x,
                         std::span<const std::size_t> batch,
                         LossOptions opts = {}) {
  check_batch(p, batch);
  require_finite(x, p.dim());
  ++eval_counters().loss_evals;
  double total = 0.0;
  for (auto j : batch) {
    const Vector u = p.block(j).A * x;
    total += 0.5 * (softmax(u).f - p.block(j).b).squaredNorm();
    if (opts.reg_in_batch) {
      total += 0.5 * p.reg_weights().cwiseProduct(u).squaredNorm();
    }
  }
  return total;
}

/// Full regularized loss L(x).
inline double loss_total(const SoftmaxProblem& p, const Vector& x) {
  const auto all = full_batch(p);
  return loss_total(p, x, all, LossOptions{true});
}

}  // namespace zospsa

#endif  // ZOSPSA_MODEL_HPP_
