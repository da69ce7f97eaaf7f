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

#include "erlq/evaluation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace erlq {
namespace {

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

GameSpec scalar_game_from(double x0) {
  GameSpec spec = testing::scalar_game();
  spec.init_mean = Vector::Constant(1, x0);
  return spec;
}

TEST(ValueCertificate, HandDerivedScalarPolicy) {
  const GameSpec spec = scalar_game_from(1.0);
  const JointPolicy joint = testing::constant_policy(spec, scalar(0.0), scalar(1.0));
  const AgentValue v = value_certificate(spec, joint).agents[0];
  EXPECT_DOUBLE_EQ(v.P[0](0, 0), 2.0);
  EXPECT_DOUBLE_EQ(v.P[1](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(v.q[0], 2.0);
  EXPECT_EQ(v.q[1], 0.0);
  EXPECT_DOUBLE_EQ(v.J, 4.0);
  EXPECT_DOUBLE_EQ(v.J_at_mean, 4.0);

  const SimulationResult sim = simulate(spec, joint, 100000, 11, {false});
  EXPECT_LE(std::abs(sim.mean_cost[0] - 4.0), 3.0 * sim.std_error[0])
      << sim.mean_cost[0] << " +/- " << sim.std_error[0];
}

TEST(ValueCertificate, ReproducesNashValues) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const GameSpec spec = testing::well_regularized_instance(seed);
    const NESolution sol = exact_ne(spec);
    const ValueCertificate cert = value_certificate(spec, sol.policy);
    for (int i = 0; i < spec.num_agents; ++i) {
      for (int t = 0; t <= spec.horizon; ++t) {
        EXPECT_LE((cert.agents[i].P[t] - sol.riccati[i][t]).norm(), 1e-10) << "seed " << seed;
        EXPECT_NEAR(cert.agents[i].q[t], sol.offsets[i][t], 1e-10) << "seed " << seed;
      }
    }
  }
}

TEST(ValueCertificate, OnlyActionAndEntropyTermsSurvive) {
  GameSpec spec = random_game(2, 4, 3, 2, 17, 0.5);
  for (auto& per_agent : spec.B)
    for (auto& b : per_agent) b.setZero();
  spec.noise_cov.setZero();
  spec.init_cov.setZero();
  spec.init_mean.setZero();
  const JointPolicy joint =
      testing::constant_policy(spec, Matrix::Zero(2, 3), Matrix::Identity(2, 2));
  const ValueCertificate cert = value_certificate(spec, joint);
  for (int i = 0; i < 2; ++i) {
    double expected = 0.0;
    for (int t = 0; t < spec.horizon; ++t) {
      expected += (0.5 * spec.tau * Matrix::Identity(2, 2) + spec.R[i][t]).trace() - spec.tau;
    }
    EXPECT_NEAR(cert.agents[i].J, expected, 1e-12);
  }
}

TEST(ValueCertificate, RejectsSingularCovariance) {
  const GameSpec spec = testing::scalar_game();
  EXPECT_THROW(value_certificate(spec, testing::constant_policy(spec, scalar(0.0), scalar(0.0))),
               DomainError);
  EXPECT_THROW(value_certificate(spec, testing::constant_policy(spec, scalar(0.0), scalar(-1.0))),
               DomainError);
}

TEST(ValueCertificate, SymmetricAndTerminal) {
  const GameSpec spec = random_game(3, 3, 3, 2, 5, 0.5);
  const ValueCertificate cert = value_certificate(spec, testing::random_pd_policy(spec, 5));
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(cert.agents[i].P[3], spec.Q[i][3]);
    EXPECT_EQ(cert.agents[i].q[3], 0.0);
    for (const Matrix& p : cert.agents[i].P) EXPECT_EQ(p, p.transpose());
    EXPECT_TRUE(std::isfinite(cert.agents[i].J));
  }
}

TEST(Exploitability, NashEquilibriumIsUnexploitable) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const GameSpec spec = testing::well_regularized_instance(seed);
    for (double gap : exploitability(spec, exact_ne(spec).policy)) {
      EXPECT_LE(std::abs(gap), 1e-8) << "seed " << seed;
    }
  }
}

TEST(Exploitability, PassivePolicyIsExploitable) {
  const GameSpec spec = scalar_game_from(1.0);
  const auto gaps = exploitability(spec, testing::constant_policy(spec, scalar(0.0), scalar(1.0)));
  // Best response value is the Nash value 5/3 + log 3.
  EXPECT_NEAR(gaps[0], 4.0 - 5.0 / 3.0 - std::log(3.0), 1e-12);
  EXPECT_GT(gaps[0], 0.0);
}

TEST(Exploitability, NonnegativeOnRandomPolicies) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto d = testing::random_dims(seed);
    const GameSpec spec =
        random_game(d.num_agents, d.horizon, d.state_dim, d.action_dim, seed, 0.6);
    for (double gap : exploitability(spec, testing::random_pd_policy(spec, seed))) {
      EXPECT_GE(gap, -1e-9) << "seed " << seed;
    }
  }
}

TEST(Exploitability, AugmentedEquilibriumGapShrinksWithDelta) {
  GameSpec spec = random_game(2, 3, 2, 1, 2, 1.0);
  spec.tau = testing::critical_tau(spec, 1e-3, 100.0) - 0.02;
  std::vector<double> worst;
  for (double delta : {0.2, 0.1}) {
    const auto gaps = exploitability(spec, exact_ne(with_tau(spec, spec.tau + delta)).policy);
    worst.push_back(std::max(gaps[0], gaps[1]));
  }
  // gap <= C delta with the constant fitted at the larger delta.
  EXPECT_LE(worst[1], worst[0] / 0.2 * 0.1 + 1e-12);
}

TEST(PolicyDistance, Examples) {
  GameSpec spec = random_game(1, 1, 2, 2, 1, 0.5);
  const JointPolicy a = testing::random_pd_policy(spec, 3);
  EXPECT_EQ(policy_distance(a, a), 0.0);
  JointPolicy b = a;
  b.policies[0].gains[0] += Matrix::Identity(2, 2);
  EXPECT_NEAR(policy_distance(a, b), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(stage_distance(a, b, 0), std::sqrt(2.0), 1e-15);
}

TEST(PolicyDistance, MetricAxioms) {
  const GameSpec spec = random_game(3, 4, 3, 2, 9, 0.5);
  for (std::uint64_t k = 0; k < 100; ++k) {
    const JointPolicy a = testing::random_pd_policy(spec, 3 * k);
    const JointPolicy b = testing::random_pd_policy(spec, 3 * k + 1, 2.0);
    const JointPolicy c = testing::random_pd_policy(spec, 3 * k + 2, 0.1);
    EXPECT_LE(policy_distance(a, c), policy_distance(a, b) + policy_distance(b, c) + 1e-12);
    EXPECT_EQ(policy_distance(a, b), policy_distance(b, a));
    EXPECT_GT(policy_distance(a, b), 0.0);
  }
}

TEST(PolicyDistance, ShapeMismatch) {
  const GameSpec two = random_game(2, 2, 2, 1, 1, 0.5);
  const GameSpec three = random_game(3, 2, 2, 1, 1, 0.5);
  const GameSpec wide = random_game(2, 2, 3, 1, 1, 0.5);
  const GameSpec longer = random_game(2, 3, 2, 1, 1, 0.5);
  EXPECT_THROW(policy_distance(zero_policy(two), zero_policy(three)), DomainError);
  EXPECT_THROW(policy_distance(zero_policy(two), zero_policy(wide)), DomainError);
  EXPECT_THROW(policy_distance(zero_policy(two), zero_policy(longer)), DomainError);
}

TEST(Simulate, NearDeterministicPolicyMatchesCertificate) {
  GameSpec spec = random_game(2, 3, 2, 2, 31, 0.5);
  spec.noise_cov.setZero();
  spec.init_cov.setZero();
  JointPolicy joint = testing::random_pd_policy(spec, 31);
  for (auto& pol : joint.policies)
    for (auto& cov : pol.covs) cov = 1e-12 * Matrix::Identity(2, 2);
  const ValueCertificate cert = value_certificate(spec, joint);
  SimulationOptions options;
  options.regularizer = RegularizerEstimate::kConditional;
  const SimulationResult sim = simulate(spec, joint, 200, 4, options);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(sim.mean_cost[i], cert.agents[i].J, 1e-6);
}

TEST(Simulate, ScalarGameFromUnitState) {
  const GameSpec spec = scalar_game_from(1.0);
  const JointPolicy joint = testing::constant_policy(spec, scalar(0.0), scalar(1.0));
  const SimulationResult sim = simulate(spec, joint, 100000, 2024, {false});
  EXPECT_LE(std::abs(sim.mean_cost[0] - 4.0), 3.0 * sim.std_error[0]);
  EXPECT_TRUE(sim.trajectories.empty());
}

TEST(Simulate, DeterministicInSeed) {
  const GameSpec spec = random_game(2, 3, 2, 1, 8, 0.5);
  const JointPolicy joint = testing::random_pd_policy(spec, 8);
  const SimulationResult a = simulate(spec, joint, 50, 99);
  const SimulationResult b = simulate(spec, joint, 50, 99);
  const SimulationResult c = simulate(spec, joint, 50, 100);
  EXPECT_EQ(a.mean_cost, b.mean_cost);
  EXPECT_EQ(a.std_error, b.std_error);
  ASSERT_EQ(a.trajectories.size(), 50u);
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_EQ(a.trajectories[k].states, b.trajectories[k].states);
    EXPECT_EQ(a.trajectories[k].actions, b.trajectories[k].actions);
  }
  EXPECT_NE(a.mean_cost, c.mean_cost);
  // Trajectory k depends only on (seed, k).
  const SimulationResult prefix = simulate(spec, joint, 10, 99);
  for (std::size_t k = 0; k < 10; ++k)
    EXPECT_EQ(prefix.trajectories[k].states, a.trajectories[k].states);
}

TEST(Simulate, StatesFollowTheDynamics) {
  GameSpec spec = random_game(2, 4, 3, 2, 12, 0.5);
  spec.noise_cov.setZero();
  const JointPolicy joint = testing::random_pd_policy(spec, 12);
  const SimulationResult sim = simulate(spec, joint, 5, 1);
  for (const Trajectory& traj : sim.trajectories) {
    ASSERT_EQ(traj.states.size(), 5u);
    for (int t = 0; t < 4; ++t) {
      Vector next = spec.A[t] * traj.states[t];
      for (int i = 0; i < 2; ++i) next += spec.B[i][t] * traj.actions[i][t];
      EXPECT_LE((next - traj.states[t + 1]).norm(), 1e-12);
    }
  }
}

TEST(Simulate, RejectsBadInputs) {
  const GameSpec spec = testing::scalar_game();
  const JointPolicy joint = testing::constant_policy(spec, scalar(0.0), scalar(1.0));
  EXPECT_THROW(simulate(spec, joint, 0, 1), DomainError);
  EXPECT_THROW(simulate(spec, testing::constant_policy(spec, scalar(0.0), scalar(0.0)), 10, 1),
               DomainError);
}

TEST(Simulate, RegularizerAverageMatchesClosedForm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = testing::random_dims(seed + 40);
    const GameSpec spec =
        random_game(d.num_agents, d.horizon, d.state_dim, d.action_dim, seed, 0.5);
    const JointPolicy joint = testing::random_pd_policy(spec, seed);
    // The certificate is affine in tau with slope equal to the expected KL total.
    const ValueCertificate lo = value_certificate(spec, joint);
    const ValueCertificate hi = value_certificate(with_tau(spec, spec.tau + 1.0), joint);
    const SimulationResult sim = simulate(spec, joint, 20000, seed, {false});
    for (int i = 0; i < spec.num_agents; ++i) {
      const double expected = spec.tau * (hi.agents[i].J - lo.agents[i].J);
      EXPECT_LE(std::abs(sim.mean_regularizer[i] - expected), 3.0 * sim.regularizer_std_error[i])
          << "seed " << seed << " agent " << i;
    }
  }
}

TEST(Simulate, AgreesWithCertificateOnRandomPolicies) {
  int total = 0, within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto d = testing::random_dims(seed + 1000);
    const GameSpec spec =
        random_game(d.num_agents, d.horizon, d.state_dim, d.action_dim, seed, 0.5);
    const JointPolicy joint = testing::random_pd_policy(spec, seed);
    const ValueCertificate cert = value_certificate(spec, joint);
    const SimulationResult sim = simulate(spec, joint, 2000, seed, {false});
    for (int i = 0; i < spec.num_agents; ++i) {
      ++total;
      if (std::abs(sim.mean_cost[i] - cert.agents[i].J) <= 3.0 * sim.std_error[i]) ++within;
    }
  }
  EXPECT_GE(within, 0.99 * total) << within << " of " << total;
}

TEST(Csv, TrajectoryLayout) {
  const GameSpec spec = random_game(2, 2, 2, 1, 3, 0.5);
  const SimulationResult sim = simulate(spec, testing::random_pd_policy(spec, 3), 2, 5);
  std::ostringstream out;
  write_trajectories_csv(out, spec, sim);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "traj_id,t,x0,x1,u0_0,u1_0");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 2 * 3);
  EXPECT_EQ(last.substr(0, 4), "1,2,");
  EXPECT_EQ(last.substr(last.size() - 2), ",,");
}

TEST(Csv, CostsLayout) {
  const GameSpec spec = scalar_game_from(1.0);
  const JointPolicy joint = testing::constant_policy(spec, scalar(0.0), scalar(1.0));
  const SimulationResult sim = simulate(spec, joint, 3, 5);
  std::ostringstream out;
  write_costs_csv(out, sim, value_certificate(spec, joint));
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("agent,empirical_mean,std_error,certificate_value\n0,", 0), 0u);
  EXPECT_EQ(text.substr(text.size() - 3), ",4\n");
}

TEST(Csv, DoublesRoundTrip) {
  for (double x : {0.1, -1.0 / 3.0, 1e-300, 12345.678, 0.0}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(4.0), "4");
}

}  // namespace
}  // namespace erlq
