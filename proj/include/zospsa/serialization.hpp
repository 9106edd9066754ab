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


// JSON forms of problem instances and diagnostics reports.

#ifndef ZOSPSA_SERIALIZATION_HPP_
#define ZOSPSA_SERIALIZATION_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zospsa/diagnostics.hpp"
#include "zospsa/errors.hpp"
#include "zospsa/linalg.hpp"
#include "zospsa/model.hpp"

namespace zospsa {

using Json = nlohmann::ordered_json;

/// Non-finite doubles have no JSON literal; they are written as null.
inline Json json_number(double v) {
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

inline Json json_number(const std::optional<double>& v) {
  return v ? json_number(*v) : Json(nullptr);
}

inline Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

inline Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(what + " must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

/// Row-major nested arrays; every row must have the same length.
inline Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw InputError(what + " must be a nonempty array of rows");
  }
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()),
           static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vector_from_json(j[r], what + " row");
    if (static_cast<std::size_t>(row.size()) != cols) {
      throw InputError(what + " is ragged");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

inline Json problem_to_json(const SoftmaxProblem& p) {
  Json out;
  out["n_blocks"] = p.n_blocks();
  out["n_rows"] = p.n_rows();
  out["dim"] = p.dim();
  out["radius"] = p.radius();
  Json blocks = Json::array();
  for (const auto& blk : p.blocks()) {
    Json b;
    b["A"] = matrix_to_json(blk.A);
    b["b"] = vector_to_json(blk.b);
    blocks.push_back(std::move(b));
  }
  out["blocks"] = std::move(blocks);
  out["w"] = vector_to_json(p.reg_weights());
  return out;
}

/// Unvalidated block data as read from JSON; lets callers tamper with an
/// instance before construction enforces the invariants.
struct ProblemData {
  std::vector<DataBlock> blocks;
  Vector w;
  double radius = 0.0;

  SoftmaxProblem build() const { return SoftmaxProblem(blocks, w, radius); }
};

inline ProblemData problem_data_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("problem must be a JSON object");
  for (const char* key : {"n_blocks", "n_rows", "dim", "radius", "blocks", "w"}) {
    if (!j.contains(key)) {
      throw InputError(std::string("problem is missing '") + key + "'");
    }
  }
  ProblemData d;
  try {
    d.radius = j.at("radius").get<double>();
    const auto n_blocks = j.at("n_blocks").get<std::size_t>();
    const auto n_rows = j.at("n_rows").get<std::size_t>();
    const auto dim = j.at("dim").get<std::size_t>();
    const Json& blocks = j.at("blocks");
    if (!blocks.is_array() || blocks.size() != n_blocks) {
      throw InputError("problem.blocks must hold n_blocks entries");
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::string tag = "blocks[" + std::to_string(b) + "]";
      DataBlock blk{matrix_from_json(blocks[b].at("A"), tag + ".A"),
                    vector_from_json(blocks[b].at("b"), tag + ".b")};
      if (static_cast<std::size_t>(blk.A.rows()) != n_rows ||
          static_cast<std::size_t>(blk.A.cols()) != dim) {
        throw InputError(tag + ".A must be n_rows x dim");
      }
      d.blocks.push_back(std::move(blk));
    }
    d.w = vector_from_json(j.at("w"), "w");
    if (static_cast<std::size_t>(d.w.size()) != n_rows) {
      throw InputError("w must have n_rows entries");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed problem: ") + e.what());
  }
  return d;
}

inline SoftmaxProblem problem_from_json(const Json& j) {
  return problem_data_from_json(j).build();
}

inline Json report_to_json(const DiagnosticsReport& r) {
  Json out;
  out["R"] = json_number(r.R);
  out["log_R_f"] = json_number(r.log_R_f);
  out["l_theory_log"] = json_number(r.l_theory_log);
  out["l_emp"] = json_number(r.l_emp);
  out["mu_cert"] = json_number(r.mu_cert);
  out["mu_emp"] = json_number(r.mu_emp);
  out["mu_reg"] = json_number(r.mu_reg);
  out["beta_log"] = json_number(r.beta_log);
  out["kappa"] = json_number(r.kappa);
  out["gamma"] = json_number(r.gamma);
  out["alpha_emp"] = json_number(r.alpha_emp);
  out["assumption_eps"] = json_number(r.assumption_eps);
  out["srank_max"] = json_number(r.srank_max);
  out["erank_H"] = json_number(r.erank_H);
  out["L_star"] = json_number(r.L_star);
  out["L0_gap"] = json_number(r.L0_gap);
  out["eta_auto"] = json_number(r.eta_auto);
  out["T_theory_log"] = json_number(r.T_theory_log);
  out["T_emp_log"] = json_number(r.T_emp_log);
  out["T_observed"] =
      r.T_observed >= 0 ? Json(r.T_observed) : Json(nullptr);
  return out;
}

}  // namespace zospsa

#endif  // ZOSPSA_SERIALIZATION_HPP_
