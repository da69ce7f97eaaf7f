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

// Builds a random two-player game, solves it both ways and checks the result.

#include <iostream>

#include "erlq/evaluation.hpp"
#include "erlq/nash_solver.hpp"

int main() {
  erlq::GameSpec spec = erlq::random_game(/*num_agents=*/2, /*horizon=*/5, /*state_dim=*/3,
                                          /*action_dim=*/1, /*seed=*/7, /*scale=*/0.5);
  spec.tau = 20.0;

  const erlq::NESolution ne = erlq::exact_ne(spec);
  const erlq::ConditionRecord rec = erlq::check_assumption_tau(spec, ne);
  std::cout << "threshold " << rec.threshold << ", tau " << rec.tau
            << (rec.satisfied ? " (ok)\n" : " (too small)\n");

  const erlq::SolveReport po = erlq::po_solve(spec);
  std::cout << "distance to exact NE: " << erlq::policy_distance(po.policy, ne.policy) << "\n";

  const auto gaps = erlq::exploitability(spec, po.policy);
  const erlq::ValueCertificate cert = erlq::value_certificate(spec, po.policy);
  const erlq::SimulationResult sim = erlq::simulate(spec, po.policy, 5000, /*seed=*/1, {false});
  for (int i = 0; i < spec.num_agents; ++i) {
    std::cout << "agent " << i << ": J = " << cert.agents[i].J << ", simulated " << sim.mean_cost[i]
              << " +/- " << sim.std_error[i] << ", gap " << gaps[i] << "\n";
  }
}
