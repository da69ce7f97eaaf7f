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

// Policy certification: exact quadratic value certificates, Nash gaps, the
// policy metric, and seeded Monte Carlo rollouts.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "erlq/regularized_control.hpp"
#include "erlq/rng.hpp"

namespace erlq {

struct ValueCertificate {
  std::vector<AgentValue> agents;
};

/// Cost-to-go of `agent` under an arbitrary linear-Gaussian joint policy.
inline AgentValue agent_value(const GameSpec& spec, const JointPolicy& joint, int agent) {
  const int horizon = spec.horizon;
  const auto p = static_cast<double>(spec.action_dim);
  const Matrix identity = Matrix::Identity(spec.action_dim, spec.action_dim);
  require_pd_covariances(joint);

  AgentValue value;
  value.P = lyapunov_backward(spec, joint, agent, 0);
  value.q.assign(horizon + 1, 0.0);
  for (int t = horizon - 1; t >= 0; --t) {
    const Matrix& next = value.P[t + 1];
    const Matrix& cov = joint.cov(agent, t);
    Matrix noise = spec.noise_cov;
    for (int j = 0; j < spec.num_agents; ++j) {
      noise += spec.B[j][t] * joint.cov(j, t) * spec.B[j][t].transpose();
    }
    value.q[t] = value.q[t + 1] + (cov * (0.5 * spec.tau * identity + spec.R[agent][t])).trace() -
                 0.5 * spec.tau * (p + log_det_spd(cov, "policy covariance")) +
                 (noise * next).trace();
  }
  finish_value(spec, value);
  return value;
}

inline ValueCertificate value_certificate(const GameSpec& spec, const JointPolicy& joint) {
  validate_policy_shape(spec, joint);
  ValueCertificate cert;
  for (int i = 0; i < spec.num_agents; ++i) cert.agents.push_back(agent_value(spec, joint, i));
  return cert;
}

/// Per-agent Nash gap J^i(joint) - J^i(best response, joint^{-i}) at the
/// initial distribution. Nonnegative up to round-off.
inline std::vector<double> exploitability(const GameSpec& spec, const JointPolicy& joint) {
  const ValueCertificate cert = value_certificate(spec, joint);
  std::vector<double> gaps;
  for (int i = 0; i < spec.num_agents; ++i) {
    gaps.push_back(cert.agents[i].J - best_response_full(spec, joint, i).value.J);
  }
  return gaps;
}

/// sum_i ||K_a^i - K_b^i||_F + ||Sigma_a^i - Sigma_b^i||_F at one stage.
inline double stage_distance(const StagePolicy& a, const StagePolicy& b) {
  if (a.gains.size() != b.gains.size() || a.covs.size() != b.covs.size()) {
    throw DomainError("policy_distance: agent count mismatch");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.gains.size(); ++i) {
    if (a.gains[i].rows() != b.gains[i].rows() || a.gains[i].cols() != b.gains[i].cols() ||
        a.covs[i].rows() != b.covs[i].rows() || a.covs[i].cols() != b.covs[i].cols()) {
      throw DomainError("policy_distance: shape mismatch");
    }
    d += (a.gains[i] - b.gains[i]).norm() + (a.covs[i] - b.covs[i]).norm();
  }
  return d;
}

inline double stage_distance(const JointPolicy& a, const JointPolicy& b, int t) {
  return stage_distance(stage_of(a, t), stage_of(b, t));
}

/// Sum over stages of the stage distance.
inline double policy_distance(const JointPolicy& a, const JointPolicy& b) {
  if (a.num_agents() != b.num_agents() || a.horizon() != b.horizon()) {
    throw DomainError("policy_distance: shape mismatch");
  }
  double d = 0.0;
  for (int t = 0; t < a.horizon(); ++t) d += stage_distance(a, b, t);
  return d;
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct Trajectory {
  std::vector<Vector> states;                // x_0..x_T
  std::vector<std::vector<Vector>> actions;  // [i][t]
  std::vector<double> realized_costs;        // [i], includes the regularizer
  std::vector<double> realized_regularizer;  // [i], tau * sum_t log(pi / mu) term
};

/// How the per-stage tau * log(pi / mu) term enters a rollout's cost.
enum class RegularizerEstimate {
  kPointwise,    // log density ratio at the sampled action
  kConditional,  // its conditional mean given x_t, tau * KL(N(Kx, Sigma) || N(0, I))
};

struct SimulationOptions {
  bool keep_trajectories = true;
  RegularizerEstimate regularizer = RegularizerEstimate::kPointwise;
};

struct SimulationResult {
  std::vector<Trajectory> trajectories;  // empty unless keep_trajectories
  std::vector<double> mean_cost;         // [i]
  std::vector<double> std_error;         // [i]
  std::vector<double> mean_regularizer;  // [i]
  std::vector<double> regularizer_std_error;
};

namespace detail {

inline Vector standard_normal(Rng& rng, Eigen::Index n) {
  Vector z(n);
  for (Eigen::Index k = 0; k < n; ++k) z(k) = rng.normal();
  return z;
}

struct RunningStats {
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
  double mean(double n) const { return sum / n; }
  double std_error(double n) const {
    if (n < 2.0) return 0.0;
    const double mu = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mu * mu) / (n - 1.0));
    return std::sqrt(var / n);
  }
};

}  // namespace detail

/// Rolls the joint policy forward `n_traj` times. Trajectory k draws all of
/// its randomness from Rng::stream(seed, k), so results depend only on
/// (spec, joint, n_traj, seed).
inline SimulationResult simulate(const GameSpec& spec, const JointPolicy& joint, int n_traj,
                                 std::uint64_t seed, const SimulationOptions& options = {}) {
  if (n_traj < 1) throw DomainError("simulate: n_traj must be at least 1");
  validate_policy_shape(spec, joint);
  const int n = spec.num_agents, horizon = spec.horizon;
  const Eigen::Index m = spec.state_dim, p = spec.action_dim;
  const double half_tau = 0.5 * spec.tau;

  // Cholesky factors and log-determinants of the policy covariances.
  std::vector<std::vector<Matrix>> chol(n, std::vector<Matrix>(horizon));
  std::vector<std::vector<double>> log_det(n, std::vector<double>(horizon));
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < horizon; ++t) {
      Eigen::LLT<Matrix> llt(symmetrize(joint.cov(i, t)));
      if (llt.info() != Eigen::Success) {
        throw DomainError(detail::indexed("Sigma", i, t) +
                          ": policy covariance is not positive definite");
      }
      chol[i][t] = llt.matrixL();
      log_det[i][t] = log_det_spd(joint.cov(i, t));
    }
  }
  const Matrix init_factor = psd_factor(spec.init_cov);
  const Matrix noise_factor = psd_factor(spec.noise_cov);

  SimulationResult result;
  std::vector<detail::RunningStats> cost_stats(n), reg_stats(n);
  if (options.keep_trajectories) result.trajectories.reserve(static_cast<std::size_t>(n_traj));

  for (int k = 0; k < n_traj; ++k) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
    Trajectory traj;
    traj.actions.assign(n, std::vector<Vector>(horizon));
    traj.realized_costs.assign(n, 0.0);
    traj.realized_regularizer.assign(n, 0.0);

    Vector x = spec.init_mean + init_factor * detail::standard_normal(rng, m);
    traj.states.push_back(x);
    for (int t = 0; t < horizon; ++t) {
      Vector next = spec.A[t] * x;
      for (int i = 0; i < n; ++i) {
        const Vector mean = joint.gain(i, t) * x;
        const Vector z = detail::standard_normal(rng, p);
        Vector u = mean + chol[i][t] * z;
        double reg = 0.0;
        if (options.regularizer == RegularizerEstimate::kPointwise) {
          // log N(u; Kx, Sigma) - log N(u; 0, I); Sigma^{-1/2}(u - Kx) = z.
          reg = half_tau * (u.squaredNorm() - z.squaredNorm() - log_det[i][t]);
        } else {
          reg = half_tau * (mean.squaredNorm() + joint.cov(i, t).trace() - static_cast<double>(p) -
                            log_det[i][t]);
        }
        traj.realized_costs[i] += x.dot(spec.Q[i][t] * x) + u.dot(spec.R[i][t] * u) + reg;
        traj.realized_regularizer[i] += reg;
        next.noalias() += spec.B[i][t] * u;
        traj.actions[i][t] = std::move(u);
      }
      next.noalias() += noise_factor * detail::standard_normal(rng, m);
      x = std::move(next);
      traj.states.push_back(x);
    }
    for (int i = 0; i < n; ++i) {
      traj.realized_costs[i] += x.dot(spec.Q[i][horizon] * x);
      cost_stats[i].add(traj.realized_costs[i]);
      reg_stats[i].add(traj.realized_regularizer[i]);
    }
    if (options.keep_trajectories) result.trajectories.push_back(std::move(traj));
  }

  const auto count = static_cast<double>(n_traj);
  for (int i = 0; i < n; ++i) {
    result.mean_cost.push_back(cost_stats[i].mean(count));
    result.std_error.push_back(cost_stats[i].std_error(count));
    result.mean_regularizer.push_back(reg_stats[i].mean(count));
    result.regularizer_std_error.push_back(reg_stats[i].std_error(count));
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV export

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

/// Columns: traj_id, t, x0..x{m-1}, u{i}_{k} for every agent i and action
/// component k. Actions are empty at t = T.
inline void write_trajectories_csv(std::ostream& out, const GameSpec& spec,
                                   const SimulationResult& result) {
  out << "traj_id,t";
  for (int k = 0; k < spec.state_dim; ++k) out << ",x" << k;
  for (int i = 0; i < spec.num_agents; ++i)
    for (int k = 0; k < spec.action_dim; ++k) out << ",u" << i << "_" << k;
  out << "\n";
  for (std::size_t id = 0; id < result.trajectories.size(); ++id) {
    const Trajectory& traj = result.trajectories[id];
    for (int t = 0; t <= spec.horizon; ++t) {
      out << id << "," << t;
      for (int k = 0; k < spec.state_dim; ++k) out << "," << format_double(traj.states[t](k));
      for (int i = 0; i < spec.num_agents; ++i) {
        for (int k = 0; k < spec.action_dim; ++k) {
          out << ",";
          if (t < spec.horizon) out << format_double(traj.actions[i][t](k));
        }
      }
      out << "\n";
    }
  }
}

inline void write_costs_csv(std::ostream& out, const SimulationResult& result,
                            const ValueCertificate& cert) {
  out << "agent,empirical_mean,std_error,certificate_value\n";
  for (std::size_t i = 0; i < result.mean_cost.size(); ++i) {
    out << i << "," << format_double(result.mean_cost[i]) << ","
        << format_double(result.std_error[i]) << "," << format_double(cert.agents[i].J) << "\n";
  }
}

}  // namespace erlq
