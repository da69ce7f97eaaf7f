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

// Single-agent core: the entropy-regularized Gaussian stage minimizer, the
// Gaussian-to-standard KL divergence, and backward recursions for one agent
// against frozen opponents.

#include <cmath>
#include <vector>

#include "erlq/game.hpp"

namespace erlq {

struct GaussianPolicyParams {
  Vector mean;
  Matrix cov;
};

/// E_{u ~ pi}[u' M u + b' u + tau log(pi(u) / N(u; 0, I))].
struct StageQuadratic {
  Matrix M;
  Vector b;
  double tau = 1.0;
};

/// Minimizer of StageQuadratic over all distributions on R^p:
/// N(-(2M + tau I)^{-1} b, (I + 2M / tau)^{-1}).
inline GaussianPolicyParams entropy_quadratic_minimizer(const StageQuadratic& q) {
  const Eigen::Index p = q.M.rows();
  const Matrix identity = Matrix::Identity(p, p);
  const Matrix m_sym = symmetrize(q.M);
  GaussianPolicyParams out;
  out.mean = -spd_solve(2.0 * m_sym + q.tau * identity, q.b);
  out.cov = spd_inverse(identity + (2.0 / q.tau) * m_sym);
  return out;
}

/// KL(N(mean, cov) || N(0, I)).
inline double kl_gaussian_to_standard(const GaussianPolicyParams& g) {
  const auto p = static_cast<double>(g.mean.size());
  const double log_det = log_det_spd(g.cov, "covariance");
  return 0.5 * (g.mean.squaredNorm() + g.cov.trace() - p - log_det);
}

/// Closed-form value of the StageQuadratic expectation at a Gaussian pi.
inline double stage_objective(const StageQuadratic& q, const GaussianPolicyParams& g) {
  const Eigen::Index p = q.M.rows();
  if (q.M.cols() != p || q.b.size() != p || g.mean.size() != p || g.cov.rows() != p ||
      g.cov.cols() != p) {
    throw DomainError("stage_objective: dimension mismatch");
  }
  return (q.M * g.cov).trace() + g.mean.dot(q.M * g.mean) + q.b.dot(g.mean) +
         q.tau * kl_gaussian_to_standard(g);
}

/// A_t + sum_{j != agent} B^j_t K^j_t.
inline Matrix effective_drift(const GameSpec& spec, const std::vector<Matrix>& gains_at_t,
                              int agent, int t) {
  Matrix drift = spec.A[t];
  for (int j = 0; j < spec.num_agents; ++j) {
    if (j != agent) drift.noalias() += spec.B[j][t] * gains_at_t[j];
  }
  return drift;
}

inline Matrix closed_loop(const GameSpec& spec, const JointPolicy& joint, int t) {
  Matrix acl = spec.A[t];
  for (int j = 0; j < spec.num_agents; ++j) acl.noalias() += spec.B[j][t] * joint.gain(j, t);
  return acl;
}

/// Value matrices of `agent` under fixed gains, stages from_t..T:
/// P_T = Q_T, P_s = Q_s + K' (tau/2 I + R) K + (A + sum_j B^j K^j)' P_{s+1} (...).
/// Element k of the result is P_{from_t + k}.
inline std::vector<Matrix> lyapunov_backward(const GameSpec& spec, const JointPolicy& joint,
                                             int agent, int from_t) {
  const int horizon = spec.horizon;
  const Matrix identity = Matrix::Identity(spec.action_dim, spec.action_dim);
  std::vector<Matrix> ps(static_cast<std::size_t>(horizon - from_t + 1));
  ps.back() = spec.Q[agent][horizon];
  for (int s = horizon - 1; s >= from_t; --s) {
    const Matrix& next = ps[s + 1 - from_t];
    const Matrix& k = joint.gain(agent, s);
    const Matrix acl = closed_loop(spec, joint, s);
    Matrix p = spec.Q[agent][s] +
               k.transpose() * (0.5 * spec.tau * identity + spec.R[agent][s]) * k +
               acl.transpose() * next * acl;
    ps[s - from_t] = symmetrize(p);
  }
  return ps;
}

/// Best response of `agent` at stage t given the stage gains of everyone
/// (the agent's own entry is ignored) and its value matrix P_{t+1}.
inline std::pair<Matrix, Matrix> best_response_stage(const GameSpec& spec, int agent,
                                                     const std::vector<Matrix>& gains_at_t,
                                                     const Matrix& p_next, int t) {
  const Matrix identity = Matrix::Identity(spec.action_dim, spec.action_dim);
  const Matrix& b = spec.B[agent][t];
  const Matrix curvature = symmetrize(spec.R[agent][t] + b.transpose() * p_next * b);
  const Matrix drift = effective_drift(spec, gains_at_t, agent, t);
  Matrix gain = -spd_solve(0.5 * spec.tau * identity + curvature, b.transpose() * p_next * drift);
  Matrix cov = spd_inverse(identity + (2.0 / spec.tau) * curvature);
  return {std::move(gain), std::move(cov)};
}

/// Quadratic cost-to-go x' P_t x + q_t of one agent, stages 0..T.
struct AgentValue {
  std::vector<Matrix> P;
  std::vector<double> q;
  double J = 0.0;          // E over x_0 ~ N(init_mean, init_cov)
  double J_at_mean = 0.0;  // x_0 = init_mean exactly
};

inline void finish_value(const GameSpec& spec, AgentValue& value) {
  const Matrix& p0 = value.P.front();
  value.J_at_mean = spec.init_mean.dot(p0 * spec.init_mean) + value.q.front();
  value.J = value.J_at_mean + (spec.init_cov * p0).trace();
}

struct BestResponse {
  LinearGaussianPolicy policy;
  AgentValue value;
};

/// Exactly optimal policy of `agent` against the frozen opponents in `joint`,
/// by backward induction with Riccati propagation. Opponent actions act on
/// agent i as extra drift sum_j B^j K^j and extra noise sum_j B^j Sigma^j B^j'.
inline BestResponse best_response_full(const GameSpec& spec, const JointPolicy& joint, int agent) {
  const int horizon = spec.horizon;
  const auto p = static_cast<double>(spec.action_dim);
  for (int j = 0; j < spec.num_agents; ++j) {
    if (j == agent) continue;
    for (int t = 0; t < horizon; ++t) {
      if (!is_positive_definite(joint.cov(j, t))) {
        throw DomainError(detail::indexed("Sigma", j, t) +
                          ": opponent covariance is not positive definite");
      }
    }
  }

  BestResponse out;
  out.policy.gains.resize(horizon);
  out.policy.covs.resize(horizon);
  out.value.P.resize(horizon + 1);
  out.value.q.assign(horizon + 1, 0.0);
  out.value.P[horizon] = spec.Q[agent][horizon];

  std::vector<Matrix> gains_at_t(spec.num_agents);
  for (int t = horizon - 1; t >= 0; --t) {
    for (int j = 0; j < spec.num_agents; ++j) gains_at_t[j] = joint.gain(j, t);
    const Matrix& next = out.value.P[t + 1];
    auto [gain, cov] = best_response_stage(spec, agent, gains_at_t, next, t);

    const Matrix& b = spec.B[agent][t];
    const Matrix drift = effective_drift(spec, gains_at_t, agent, t);
    const Matrix curvature = symmetrize(spec.R[agent][t] + b.transpose() * next * b);
    const Matrix cross = b.transpose() * next * drift;
    // K' H K + 2 K' cross = -cross' H^{-1} cross at the optimal K.
    Matrix pt = spec.Q[agent][t] + drift.transpose() * next * drift + cross.transpose() * gain;
    out.value.P[t] = symmetrize(pt);

    Matrix noise = spec.noise_cov;
    for (int j = 0; j < spec.num_agents; ++j) {
      if (j != agent) noise += spec.B[j][t] * joint.cov(j, t) * spec.B[j][t].transpose();
    }
    out.value.q[t] = out.value.q[t + 1] + (noise * next).trace() + (curvature * cov).trace() +
                     0.5 * spec.tau * (cov.trace() - p - log_det_spd(cov, "covariance"));
    out.policy.gains[t] = std::move(gain);
    out.policy.covs[t] = std::move(cov);
  }
  finish_value(spec, out.value);
  return out;
}

}  // namespace erlq
