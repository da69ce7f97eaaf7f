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

// Problem instance and policy types for finite-horizon N-agent LQ games with
// a relative-entropy penalty against a standard normal action prior.
//
//   x_{t+1} = A_t x_t + sum_i B^i_t u^i_t + w_t,   w_t ~ N(0, noise_cov)
//   x_0 ~ N(init_mean, init_cov)
//
// Agent i pays x_t' Q^i_t x_t + u' R^i_t u + tau * log(pi / mu) per stage and
// x_T' Q^i_T x_T at the end.

#include <cstdint>
#include <string>
#include <vector>

#include "erlq/errors.hpp"
#include "erlq/linalg.hpp"
#include "erlq/rng.hpp"

namespace erlq {

struct GameSpec {
  int num_agents = 0;
  int horizon = 0;     // T; stages 0..T-1, terminal cost at T
  int state_dim = 0;   // m
  int action_dim = 0;  // p, shared by all agents
  double tau = 1.0;

  std::vector<Matrix> A;               // [t], m x m, size T
  std::vector<std::vector<Matrix>> B;  // [i][t], m x p, size T
  std::vector<std::vector<Matrix>> Q;  // [i][t], m x m, size T + 1
  std::vector<std::vector<Matrix>> R;  // [i][t], p x p, size T
  Matrix noise_cov;                    // m x m
  Vector init_mean;                    // m
  Matrix init_cov;                     // m x m

  bool operator==(const GameSpec& other) const {
    return num_agents == other.num_agents && horizon == other.horizon &&
           state_dim == other.state_dim && action_dim == other.action_dim && tau == other.tau &&
           A == other.A && B == other.B && Q == other.Q && R == other.R &&
           noise_cov == other.noise_cov && init_mean == other.init_mean &&
           init_cov == other.init_cov;
  }
};

/// u_t ~ N(gains[t] x_t, covs[t]).
struct LinearGaussianPolicy {
  std::vector<Matrix> gains;  // [t], p x m
  std::vector<Matrix> covs;   // [t], p x p

  bool operator==(const LinearGaussianPolicy&) const = default;
};

struct JointPolicy {
  std::vector<LinearGaussianPolicy> policies;  // [i]

  int num_agents() const { return static_cast<int>(policies.size()); }
  int horizon() const {
    return policies.empty() ? 0 : static_cast<int>(policies.front().gains.size());
  }

  const Matrix& gain(int agent, int t) const { return policies[agent].gains[t]; }
  const Matrix& cov(int agent, int t) const { return policies[agent].covs[t]; }

  bool operator==(const JointPolicy&) const = default;
};

/// Gains and covariances of every agent at one stage.
struct StagePolicy {
  std::vector<Matrix> gains;  // [i]
  std::vector<Matrix> covs;   // [i]
};

/// All-zero joint policy (gains and covariances). Valid only as solver state.
inline JointPolicy zero_policy(const GameSpec& spec) {
  JointPolicy joint;
  joint.policies.resize(spec.num_agents);
  for (auto& pol : joint.policies) {
    pol.gains.assign(spec.horizon, Matrix::Zero(spec.action_dim, spec.state_dim));
    pol.covs.assign(spec.horizon, Matrix::Zero(spec.action_dim, spec.action_dim));
  }
  return joint;
}

inline StagePolicy stage_of(const JointPolicy& joint, int t) {
  StagePolicy stage;
  for (const auto& pol : joint.policies) {
    stage.gains.push_back(pol.gains[t]);
    stage.covs.push_back(pol.covs[t]);
  }
  return stage;
}

inline void set_stage(JointPolicy& joint, int t, const StagePolicy& stage) {
  for (int i = 0; i < joint.num_agents(); ++i) {
    joint.policies[i].gains[t] = stage.gains[i];
    joint.policies[i].covs[t] = stage.covs[i];
  }
}

inline GameSpec with_tau(GameSpec spec, double tau) {
  spec.tau = tau;
  return spec;
}

namespace detail {

inline std::string indexed(const std::string& name, int i) {
  return name + "[" + std::to_string(i) + "]";
}

inline std::string indexed(const std::string& name, int i, int t) {
  return indexed(indexed(name, i), t);
}

inline std::string shape_string(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

inline void check_shape(const Matrix& x, int rows, int cols, const std::string& field) {
  if (x.rows() != rows || x.cols() != cols) {
    throw SpecError(field, "dimension mismatch: expected " + shape_string(rows, cols) +
                               " matrix, got " + shape_string(x.rows(), x.cols()));
  }
  if (!x.allFinite()) throw SpecError(field, "non-finite entry");
}

inline void check_count(std::size_t got, int want, const std::string& field) {
  if (got != static_cast<std::size_t>(want)) {
    throw SpecError(field, "dimension mismatch: expected " + std::to_string(want) +
                               " entries, got " + std::to_string(got));
  }
}

constexpr double kSymmetryTol = 1e-9;
constexpr double kPsdTol = 1e-10;

/// Symmetrizes x in place after checking near-symmetry; then checks PSD
/// (or PD when `strict`). `label` names the matrix family in messages.
inline void symmetrize_and_check(Matrix& x, bool strict, const std::string& label,
                                 const std::string& field) {
  const double norm = x.norm();
  if ((x - x.transpose()).norm() > kSymmetryTol * (1.0 + norm)) {
    throw SpecError(field, label + " not symmetric");
  }
  x = symmetrize(x);
  const double lo = min_eigenvalue(x);
  if (strict) {
    if (!(lo > 0.0)) {
      throw SpecError(field,
                      label + " not positive definite (min eigenvalue " + std::to_string(lo) + ")");
    }
  } else if (lo < -kPsdTol * (1.0 + norm)) {
    throw SpecError(
        field, label + " not positive semidefinite (min eigenvalue " + std::to_string(lo) + ")");
  }
}

}  // namespace detail

/// Checks dimensions and definiteness, symmetrizing the symmetric fields in
/// place. Throws SpecError naming the offending field. Idempotent.
inline void validate(GameSpec& spec) {
  using detail::check_count;
  using detail::check_shape;
  using detail::indexed;
  if (spec.num_agents < 1) throw SpecError("num_agents", "must be positive");
  if (spec.horizon < 1) throw SpecError("horizon", "must be positive");
  if (spec.state_dim < 1) throw SpecError("state_dim", "must be positive");
  if (spec.action_dim < 1) throw SpecError("action_dim", "must be positive");
  if (!std::isfinite(spec.tau) || !(spec.tau > 0.0)) {
    throw SpecError("tau", "tau must be positive and finite");
  }
  const int n = spec.num_agents, horizon = spec.horizon;
  const int m = spec.state_dim, p = spec.action_dim;

  check_count(spec.A.size(), horizon, "A");
  for (int t = 0; t < horizon; ++t) check_shape(spec.A[t], m, m, indexed("A", t));

  check_count(spec.B.size(), n, "B");
  check_count(spec.Q.size(), n, "Q");
  check_count(spec.R.size(), n, "R");
  for (int i = 0; i < n; ++i) {
    check_count(spec.B[i].size(), horizon, indexed("B", i));
    check_count(spec.Q[i].size(), horizon + 1, indexed("Q", i));
    check_count(spec.R[i].size(), horizon, indexed("R", i));
    for (int t = 0; t < horizon; ++t) {
      check_shape(spec.B[i][t], m, p, indexed("B", i, t));
      check_shape(spec.R[i][t], p, p, indexed("R", i, t));
      detail::symmetrize_and_check(spec.R[i][t], true, "R", indexed("R", i, t));
    }
    for (int t = 0; t <= horizon; ++t) {
      check_shape(spec.Q[i][t], m, m, indexed("Q", i, t));
      detail::symmetrize_and_check(spec.Q[i][t], false, "Q", indexed("Q", i, t));
    }
  }

  check_shape(spec.noise_cov, m, m, "noise_cov");
  detail::symmetrize_and_check(spec.noise_cov, false, "noise_cov", "noise_cov");
  check_shape(spec.init_cov, m, m, "init_cov");
  detail::symmetrize_and_check(spec.init_cov, false, "init_cov", "init_cov");
  if (spec.init_mean.size() != m) {
    throw SpecError("init_mean", "dimension mismatch: expected length " + std::to_string(m) +
                                     ", got " + std::to_string(spec.init_mean.size()));
  }
  if (!spec.init_mean.allFinite()) throw SpecError("init_mean", "non-finite entry");
}

/// Checks that `joint` has the agent count and per-stage shapes of `spec`.
/// Covariances are not required to be PD here.
inline void validate_policy_shape(const GameSpec& spec, const JointPolicy& joint) {
  using detail::indexed;
  detail::check_count(joint.policies.size(), spec.num_agents, "policy");
  for (int i = 0; i < spec.num_agents; ++i) {
    const auto& pol = joint.policies[i];
    detail::check_count(pol.gains.size(), spec.horizon, indexed("K", i));
    detail::check_count(pol.covs.size(), spec.horizon, indexed("Sigma", i));
    for (int t = 0; t < spec.horizon; ++t) {
      detail::check_shape(pol.gains[t], spec.action_dim, spec.state_dim, indexed("K", i, t));
      detail::check_shape(pol.covs[t], spec.action_dim, spec.action_dim, indexed("Sigma", i, t));
    }
  }
}

/// Throws DomainError unless every policy covariance is positive definite.
inline void require_pd_covariances(const JointPolicy& joint) {
  for (int i = 0; i < joint.num_agents(); ++i) {
    for (int t = 0; t < joint.horizon(); ++t) {
      if (!is_positive_definite(joint.cov(i, t))) {
        throw DomainError(detail::indexed("Sigma", i, t) +
                          ": policy covariance is not positive definite");
      }
    }
  }
}

namespace detail {

inline Matrix uniform_matrix(Rng& rng, int rows, int cols, double scale) {
  Matrix x(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) x(r, c) = rng.uniform(-scale, scale);
  return x;
}

inline Matrix gram(Rng& rng, int dim, double scale) {
  Matrix g = uniform_matrix(rng, dim, dim, scale);
  return symmetrize(g.transpose() * g);
}

}  // namespace detail

/// Seeded random instance: A, B uniform in [-scale, scale]; Q = G'G;
/// R = G'G + I; noise and initial covariances G'G; tau = 1. The result
/// passes `validate`.
inline GameSpec random_game(int num_agents, int horizon, int state_dim, int action_dim,
                            std::uint64_t seed, double scale) {
  if (num_agents < 1 || horizon < 1 || state_dim < 1 || action_dim < 1) {
    throw SpecError("random_game", "dimensions must be positive");
  }
  if (!(scale > 0.0)) throw SpecError("random_game", "scale must be positive");
  Rng rng(seed);
  GameSpec spec;
  spec.num_agents = num_agents;
  spec.horizon = horizon;
  spec.state_dim = state_dim;
  spec.action_dim = action_dim;
  spec.tau = 1.0;
  for (int t = 0; t < horizon; ++t) {
    spec.A.push_back(detail::uniform_matrix(rng, state_dim, state_dim, scale));
  }
  spec.B.resize(num_agents);
  spec.Q.resize(num_agents);
  spec.R.resize(num_agents);
  for (int i = 0; i < num_agents; ++i) {
    for (int t = 0; t < horizon; ++t) {
      spec.B[i].push_back(detail::uniform_matrix(rng, state_dim, action_dim, scale));
      spec.R[i].push_back(detail::gram(rng, action_dim, scale) +
                          Matrix::Identity(action_dim, action_dim));
    }
    for (int t = 0; t <= horizon; ++t) spec.Q[i].push_back(detail::gram(rng, state_dim, scale));
  }
  spec.noise_cov = detail::gram(rng, state_dim, scale);
  spec.init_cov = detail::gram(rng, state_dim, scale);
  spec.init_mean = detail::uniform_matrix(rng, state_dim, 1, 1.0);
  validate(spec);
  return spec;
}

}  // namespace erlq
