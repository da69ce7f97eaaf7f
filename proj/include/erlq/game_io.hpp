// Copyright 2026 The erlq Authors
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

#pragma once

// JSON documents for game specs and joint policies.
//
// Spec document keys: num_agents, horizon, state_dim, action_dim, tau, A, B,
// Q, R, noise_cov, init_mean, init_cov. Matrices are row-major nested arrays.
// A time-varying field is either a list of matrices (length T, or T + 1 for
// Q) or a single bare matrix meaning "constant in t". B, Q and R are lists
// indexed by agent.
//
// Policy document keys: num_agents, horizon, state_dim, action_dim, K, Sigma;
// K and Sigma are [agent][t] lists of matrices.

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <string_view>

#include "erlq/game.hpp"

namespace erlq {

using Json = nlohmann::ordered_json;

namespace detail {

inline bool is_bare_matrix(const Json& j) {
  return j.is_array() && !j.empty() && j.front().is_array() &&
         (j.front().empty() || j.front().front().is_number());
}

inline Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!is_bare_matrix(j)) throw SpecError(field, "expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix x(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw SpecError(field, "ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw SpecError(field, "matrix entry is not a number");
      x(r, c) = v.get<double>();
    }
  }
  return x;
}

inline Json matrix_to_json(const Matrix& x) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back(x(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// A bare matrix broadcast to `length`, or an explicit list of that length.
inline std::vector<Matrix> sequence_from_json(const Json& j, int length, const std::string& field) {
  if (is_bare_matrix(j)) return std::vector<Matrix>(length, matrix_from_json(j, field));
  if (!j.is_array()) throw SpecError(field, "expected a matrix or a list of matrices");
  check_count(j.size(), length, field);
  std::vector<Matrix> out;
  for (int t = 0; t < length; ++t) out.push_back(matrix_from_json(j[t], indexed(field, t)));
  return out;
}

inline Json sequence_to_json(const std::vector<Matrix>& xs) {
  Json out = Json::array();
  for (const auto& x : xs) out.push_back(matrix_to_json(x));
  return out;
}

inline std::vector<std::vector<Matrix>> per_agent_from_json(const Json& j, int agents, int length,
                                                            const std::string& field) {
  if (!j.is_array()) throw SpecError(field, "expected a list indexed by agent");
  check_count(j.size(), agents, field);
  std::vector<std::vector<Matrix>> out;
  for (int i = 0; i < agents; ++i)
    out.push_back(sequence_from_json(j[i], length, indexed(field, i)));
  return out;
}

inline const Json& require(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw SpecError(key, "missing field");
  return *it;
}

inline int positive_int(const Json& doc, const char* key) {
  const Json& v = require(doc, key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw SpecError(key, "expected a positive integer");
  }
  return v.get<int>();
}

inline Json parse_document(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SpecError("", std::string("parse error: ") + e.what());
  }
}

}  // namespace detail

/// Parses and validates a spec document. Throws SpecError with a field path.
inline GameSpec load_game_spec(std::string_view text) {
  using namespace detail;
  const Json doc = parse_document(text);
  if (!doc.is_object()) throw SpecError("", "parse error: top level must be an object");

  GameSpec spec;
  spec.num_agents = positive_int(doc, "num_agents");
  spec.horizon = positive_int(doc, "horizon");
  spec.state_dim = positive_int(doc, "state_dim");
  spec.action_dim = positive_int(doc, "action_dim");
  const Json& tau = require(doc, "tau");
  if (!tau.is_number()) throw SpecError("tau", "expected a number");
  spec.tau = tau.get<double>();

  spec.A = sequence_from_json(require(doc, "A"), spec.horizon, "A");
  spec.B = per_agent_from_json(require(doc, "B"), spec.num_agents, spec.horizon, "B");
  spec.Q = per_agent_from_json(require(doc, "Q"), spec.num_agents, spec.horizon + 1, "Q");
  spec.R = per_agent_from_json(require(doc, "R"), spec.num_agents, spec.horizon, "R");
  spec.noise_cov = matrix_from_json(require(doc, "noise_cov"), "noise_cov");
  spec.init_cov = matrix_from_json(require(doc, "init_cov"), "init_cov");

  const Json& mean = require(doc, "init_mean");
  if (!mean.is_array()) throw SpecError("init_mean", "expected a list of numbers");
  spec.init_mean.resize(static_cast<Eigen::Index>(mean.size()));
  for (std::size_t k = 0; k < mean.size(); ++k) {
    if (!mean[k].is_number()) throw SpecError("init_mean", "entry is not a number");
    spec.init_mean(static_cast<Eigen::Index>(k)) = mean[k].get<double>();
  }

  validate(spec);
  return spec;
}

inline Json game_spec_to_json(const GameSpec& spec) {
  using detail::sequence_to_json;
  Json doc;
  doc["num_agents"] = spec.num_agents;
  doc["horizon"] = spec.horizon;
  doc["state_dim"] = spec.state_dim;
  doc["action_dim"] = spec.action_dim;
  doc["tau"] = spec.tau;
  doc["A"] = sequence_to_json(spec.A);
  for (const char* key : {"B", "Q", "R"}) doc[key] = Json::array();
  for (int i = 0; i < spec.num_agents; ++i) {
    doc["B"].push_back(sequence_to_json(spec.B[i]));
    doc["Q"].push_back(sequence_to_json(spec.Q[i]));
    doc["R"].push_back(sequence_to_json(spec.R[i]));
  }
  doc["noise_cov"] = detail::matrix_to_json(spec.noise_cov);
  doc["init_mean"] = Json::array();
  for (Eigen::Index k = 0; k < spec.init_mean.size(); ++k)
    doc["init_mean"].push_back(spec.init_mean(k));
  doc["init_cov"] = detail::matrix_to_json(spec.init_cov);
  return doc;
}

inline std::string serialize_game_spec(const GameSpec& spec) {
  return game_spec_to_json(spec).dump(2) + "\n";
}

inline Json policy_to_json(const JointPolicy& joint) {
  Json doc;
  doc["num_agents"] = joint.num_agents();
  doc["horizon"] = joint.horizon();
  const Matrix& k0 = joint.gain(0, 0);
  doc["state_dim"] = k0.cols();
  doc["action_dim"] = k0.rows();
  doc["K"] = Json::array();
  doc["Sigma"] = Json::array();
  for (const auto& pol : joint.policies) {
    doc["K"].push_back(detail::sequence_to_json(pol.gains));
    doc["Sigma"].push_back(detail::sequence_to_json(pol.covs));
  }
  return doc;
}

inline std::string serialize_policy(const JointPolicy& joint) {
  return policy_to_json(joint).dump(2) + "\n";
}

/// Parses a policy document and checks its shapes against `spec`.
inline JointPolicy load_policy(std::string_view text, const GameSpec& spec) {
  using namespace detail;
  const Json doc = parse_document(text);
  if (!doc.is_object()) throw SpecError("", "parse error: top level must be an object");
  const int agents = positive_int(doc, "num_agents");
  const int horizon = positive_int(doc, "horizon");
  if (agents != spec.num_agents) throw SpecError("num_agents", "does not match the game spec");
  if (horizon != spec.horizon) throw SpecError("horizon", "does not match the game spec");
  const auto gains = per_agent_from_json(require(doc, "K"), agents, horizon, "K");
  const auto covs = per_agent_from_json(require(doc, "Sigma"), agents, horizon, "Sigma");
  JointPolicy joint;
  for (int i = 0; i < agents; ++i) joint.policies.push_back({gains[i], covs[i]});
  validate_policy_shape(spec, joint);
  return joint;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace erlq
