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

// Nash equilibrium solvers.
//
// exact_ne: backward sweep; at each stage all agents' gains come from one
// stacked linear system Phi_t [K^1; ...; K^N] = -[B^1' P^1 A; ...; B^N' P^N A],
// then each P^i is propagated with its coupled Riccati equation.
//
// po_solve: receding-horizon policy optimization. Starting from the all-zero
// policy, each stage (last first) iterates the simultaneous best-response map
// with the future stages frozen.
//
// delta_augment_solve: when tau is too small for the uniqueness/contraction
// condition, solve the game with tau + delta and report how exploitable that
// policy is in the original game.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "erlq/evaluation.hpp"

namespace erlq {

struct NESolution {
  JointPolicy policy;
  std::vector<std::vector<Matrix>> riccati;  // [i][t], t = 0..T
  std::vector<std::vector<double>> offsets;  // [i][t], offsets[i][T] = 0
};

/// Condition tau > 2 gamma_B^2 gamma_P^* (N - 1), evaluated a posteriori.
struct ConditionRecord {
  double gamma_B = 0.0;
  double gamma_P_star = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
  double tau = 0.0;
  bool satisfied = false;
};

struct PoOptions {
  int inner_iters = 500;    // L, per stage
  double stop_tol = 1e-10;  // stop a stage once its distance drops below; 0 runs all L
};

struct SolveReport {
  JointPolicy policy;
  std::optional<NESolution> solution;
  std::vector<std::vector<double>> trace;  // [t][l], inner-loop distances
  std::vector<double> contraction_moduli;  // [t]
  std::optional<ConditionRecord> condition;
  std::optional<double> delta_used;
  std::vector<double> exploitability;  // original game, filled by delta_augment_solve
};

/// Stage coupling matrix: diagonal blocks tau/2 I + R^i + B^i' P^i B^i,
/// off-diagonal blocks B^i' P^i B^j.
inline Matrix phi_matrix(const GameSpec& spec, int t, const std::vector<Matrix>& p_next) {
  const int n = spec.num_agents, p = spec.action_dim;
  Matrix phi(n * p, n * p);
  for (int i = 0; i < n; ++i) {
    const Matrix bt_p = spec.B[i][t].transpose() * p_next[i];
    for (int j = 0; j < n; ++j) {
      phi.block(i * p, j * p, p, p) = bt_p * spec.B[j][t];
    }
    phi.block(i * p, i * p, p, p) = symmetrize(phi.block(i * p, i * p, p, p) + spec.R[i][t]) +
                                    0.5 * spec.tau * Matrix::Identity(p, p);
  }
  return phi;
}

constexpr double kMinReciprocalCondition = 1e-12;

inline NESolution exact_ne(const GameSpec& spec) {
  const int n = spec.num_agents, horizon = spec.horizon;
  const int m = spec.state_dim, p = spec.action_dim;
  const auto pd = static_cast<double>(p);
  const Matrix identity = Matrix::Identity(p, p);

  NESolution sol;
  sol.policy = zero_policy(spec);
  sol.riccati.assign(n, std::vector<Matrix>(horizon + 1));
  sol.offsets.assign(n, std::vector<double>(horizon + 1, 0.0));
  for (int i = 0; i < n; ++i) sol.riccati[i][horizon] = spec.Q[i][horizon];

  std::vector<Matrix> p_next(n);
  for (int t = horizon - 1; t >= 0; --t) {
    for (int i = 0; i < n; ++i) p_next[i] = sol.riccati[i][t + 1];

    const Matrix phi = phi_matrix(spec, t, p_next);
    Matrix rhs(n * p, m);
    for (int i = 0; i < n; ++i) {
      rhs.block(i * p, 0, p, m) = -spec.B[i][t].transpose() * p_next[i] * spec.A[t];
    }
    Eigen::PartialPivLU<Matrix> lu(phi);
    const double rcond = lu.rcond();
    if (!(rcond >= kMinReciprocalCondition)) {
      std::ostringstream msg;
      msg << "stage " << t << ": non-unique or ill-conditioned NE (reciprocal condition " << rcond
          << "); consider delta-augmentation";
      throw SolverError(msg.str());
    }
    const Matrix stacked = lu.solve(rhs);

    std::vector<Matrix> gains(n);
    for (int i = 0; i < n; ++i) gains[i] = stacked.block(i * p, 0, p, m);

    for (int i = 0; i < n; ++i) {
      const Matrix& b = spec.B[i][t];
      const Matrix& next = p_next[i];
      const Matrix curvature = symmetrize(spec.R[i][t] + b.transpose() * next * b);
      const Matrix cov = spd_inverse(identity + (2.0 / spec.tau) * curvature);
      const Matrix drift = effective_drift(spec, gains, i, t);
      const Matrix cross = b.transpose() * next * drift;
      const Matrix regularized = 0.5 * spec.tau * identity + curvature;
      Matrix riccati = spec.Q[i][t] + drift.transpose() * next * drift -
                       cross.transpose() * spd_solve(regularized, cross);

      sol.policy.policies[i].gains[t] = gains[i];
      sol.policy.policies[i].covs[t] = cov;
      sol.riccati[i][t] = symmetrize(riccati);
    }
    // Offsets need every agent's stage-t covariance.
    for (int i = 0; i < n; ++i) {
      const Matrix& next = p_next[i];
      const Matrix& b = spec.B[i][t];
      const Matrix& cov = sol.policy.cov(i, t);
      const Matrix curvature = symmetrize(spec.R[i][t] + b.transpose() * next * b);
      double offset = (spec.noise_cov * next).trace() + (curvature * cov).trace() +
                      0.5 * spec.tau * (cov.trace() - pd - log_det_spd(cov)) +
                      sol.offsets[i][t + 1];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        offset += (sol.policy.cov(j, t) * spec.B[j][t].transpose() * next * spec.B[j][t]).trace();
      }
      sol.offsets[i][t] = offset;
    }
  }
  return sol;
}

inline double gamma_B(const GameSpec& spec) {
  double g = 0.0;
  for (const auto& per_agent : spec.B)
    for (const auto& b : per_agent) g = std::max(g, b.norm());
  return g;
}

/// rho_t = (2 / tau) gamma_B^2 gamma_{P,t} (N - 1), gamma_{P,t} = max_i ||P^i_{t+1}||_F.
inline double contraction_modulus(const GameSpec& spec, int /*t*/,
                                  const std::vector<Matrix>& p_next) {
  double gamma_p = 0.0;
  for (const auto& pm : p_next) gamma_p = std::max(gamma_p, pm.norm());
  const double gb = gamma_B(spec);
  return (2.0 / spec.tau) * gb * gb * gamma_p * static_cast<double>(spec.num_agents - 1);
}

inline ConditionRecord check_assumption_tau(const GameSpec& spec, const NESolution& sol,
                                            double margin = 0.0) {
  ConditionRecord rec;
  rec.gamma_B = gamma_B(spec);
  for (const auto& per_agent : sol.riccati)
    for (const auto& pm : per_agent) rec.gamma_P_star = std::max(rec.gamma_P_star, pm.norm());
  rec.threshold =
      2.0 * rec.gamma_B * rec.gamma_B * rec.gamma_P_star * static_cast<double>(spec.num_agents - 1);
  rec.margin = margin;
  rec.tau = spec.tau;
  rec.satisfied = spec.tau > rec.threshold * (1.0 + margin);
  return rec;
}

/// Value matrices P^i_{t+1} of every agent under the (frozen) stages after t.
inline std::vector<Matrix> future_values(const GameSpec& spec, const JointPolicy& joint, int t) {
  std::vector<Matrix> p_next;
  for (int i = 0; i < spec.num_agents; ++i) {
    p_next.push_back(lyapunov_backward(spec, joint, i, t + 1).front());
  }
  return p_next;
}

/// Simultaneous best response of every agent at stage t against the stage-t
/// gains in `joint`, with future values `p_next`.
inline StagePolicy composite_best_response(const GameSpec& spec, const JointPolicy& joint, int t,
                                           const std::vector<Matrix>& p_next) {
  const StagePolicy current = stage_of(joint, t);
  StagePolicy out;
  for (int i = 0; i < spec.num_agents; ++i) {
    auto [gain, cov] = best_response_stage(spec, i, current.gains, p_next[i], t);
    out.gains.push_back(std::move(gain));
    out.covs.push_back(std::move(cov));
  }
  return out;
}

/// Per-stage distance between S_t and Psi_t(S_t | S_{t+1:T-1}).
inline std::vector<double> fixed_point_residuals(const GameSpec& spec, const JointPolicy& joint) {
  std::vector<double> residuals(spec.horizon);
  for (int t = 0; t < spec.horizon; ++t) {
    const auto p_next = future_values(spec, joint, t);
    residuals[t] =
        stage_distance(composite_best_response(spec, joint, t, p_next), stage_of(joint, t));
  }
  return residuals;
}

inline SolveReport po_solve(const GameSpec& spec, const PoOptions& options = {}) {
  if (options.inner_iters < 1) throw DomainError("po_solve: inner_iters must be at least 1");
  if (!(options.stop_tol >= 0.0)) throw DomainError("po_solve: stop_tol must be nonnegative");
  SolveReport report;
  report.policy = zero_policy(spec);
  report.trace.resize(spec.horizon);
  report.contraction_moduli.resize(spec.horizon);

  for (int t = spec.horizon - 1; t >= 0; --t) {
    const auto p_next = future_values(spec, report.policy, t);
    report.contraction_moduli[t] = contraction_modulus(spec, t, p_next);
    for (int l = 0; l < options.inner_iters; ++l) {
      StagePolicy updated = composite_best_response(spec, report.policy, t, p_next);
      const double d = stage_distance(updated, stage_of(report.policy, t));
      set_stage(report.policy, t, updated);
      report.trace[t].push_back(d);
      if (d < options.stop_tol) break;
    }
  }
  return report;
}

struct AugmentOptions {
  double delta_init = 1e-3;
  double growth = 2.0;
  int max_rounds = 30;
  double margin = 0.0;
  PoOptions po;
};

/// Tries delta = delta_init * growth^k, k = 0..max_rounds-1, and keeps the
/// first for which the tau + delta game satisfies the condition at its exact
/// NE. The returned policy is po_solve's output on that game; exploitability
/// is measured in the original game.
inline SolveReport delta_augment_solve(const GameSpec& spec, const AugmentOptions& options = {}) {
  if (!(options.delta_init > 0.0))
    throw DomainError("delta_augment_solve: delta_init must be positive");
  if (!(options.growth > 1.0)) throw DomainError("delta_augment_solve: growth must exceed 1");
  if (options.max_rounds < 1)
    throw DomainError("delta_augment_solve: max_rounds must be at least 1");

  double delta = options.delta_init;
  double last_gap = std::numeric_limits<double>::quiet_NaN();
  for (int round = 0; round < options.max_rounds; ++round, delta *= options.growth) {
    const GameSpec augmented = with_tau(spec, spec.tau + delta);
    std::optional<NESolution> sol;
    try {
      sol = exact_ne(augmented);
    } catch (const SolverError&) {
      continue;
    }
    ConditionRecord rec = check_assumption_tau(augmented, *sol, options.margin);
    if (!rec.satisfied) {
      last_gap = rec.threshold * (1.0 + options.margin) - augmented.tau;
      continue;
    }
    SolveReport report = po_solve(augmented, options.po);
    report.solution = std::move(sol);
    report.condition = rec;
    report.delta_used = delta;
    report.exploitability = exploitability(spec, report.policy);
    return report;
  }
  std::ostringstream msg;
  msg << "delta-augmentation: condition not met after " << options.max_rounds
      << " rounds (last delta " << delta / options.growth << ", threshold gap " << last_gap << ")";
  throw SolverError(msg.str());
}

}  // namespace erlq
