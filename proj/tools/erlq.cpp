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

// erlq: solve, check and evaluate entropy-regularized N-agent LQ games.
//
//   erlq solve-exact --spec game.json --out results/
//   erlq solve-po    --spec game.json --out results/ --inner-iters 100
//   erlq check       --spec game.json --out results/ --margin 0.1
//   erlq augment     --spec game.json --out results/ --delta-init 0.01
//   erlq eval        --spec game.json --policy results/policy.json --compare other.json
//   erlq simulate    --spec game.json --policy results/policy.json --n-traj 10000 --seed 7
//   erlq randgen     --out specs/ --agents 2 --horizon 3 --state-dim 2 --action-dim 1 --seed 7

#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "erlq/cli.hpp"

int main(int argc, char** argv) {
  erlq::RunConfig config;
  CLI::App app{"Nash equilibria of entropy-regularized general-sum LQ games"};
  app.require_subcommand(1);

  const std::map<std::string, erlq::Command> commands = {
      {"solve-exact", erlq::Command::kSolveExact},
      {"solve-po", erlq::Command::kSolvePo},
      {"check", erlq::Command::kCheck},
      {"augment", erlq::Command::kAugment},
      {"eval", erlq::Command::kEval},
      {"simulate", erlq::Command::kSimulate},
      {"randgen", erlq::Command::kRandgen},
  };
  const std::map<std::string, std::string> descriptions = {
      {"solve-exact",
       "exact NE via the stacked coupling system; writes policy.json, certificate.json"},
      {"solve-po", "receding-horizon policy optimization; writes policy.json, trace.csv"},
      {"check", "a-posteriori regularization condition at the exact NE; writes condition.json"},
      {"augment", "delta-augmented solve; writes policy.json, trace.csv, condition.json"},
      {"eval", "value certificates and Nash gaps of a policy; writes certificate.json"},
      {"simulate", "Monte Carlo rollouts; writes trajectories.csv, costs.csv"},
      {"randgen", "seeded random game spec; writes spec.json"},
  };

  for (const auto& [name, command] : commands) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->callback([&config, command = command] { config.command = command; });
    sub->add_option("--out", config.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", config.seed, "random seed")->capture_default_str();
    if (command == erlq::Command::kRandgen) {
      sub->add_option("--agents", config.num_agents)
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
      sub->add_option("--horizon", config.horizon)
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
      sub->add_option("--state-dim", config.state_dim)
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
      sub->add_option("--action-dim", config.action_dim)
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
      sub->add_option("--scale", config.scale)->check(CLI::PositiveNumber)->capture_default_str();
      sub->add_option("--tau", config.tau)->check(CLI::PositiveNumber)->capture_default_str();
      continue;
    }
    sub->add_option("--spec", config.spec_path, "game spec JSON")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--inner-iters", config.inner_iters, "inner iterations per stage (L)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--stop-tol", config.stop_tol, "stage distance tolerance (0: run all L)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--delta-init", config.delta_init)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--growth", config.growth)
        ->check(CLI::Range(1.0 + 1e-12, 1e12))
        ->capture_default_str();
    sub->add_option("--max-rounds", config.max_rounds)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--n-traj", config.n_traj)->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--margin", config.margin)
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--policy", config.policy_path, "policy JSON (default: exact NE)")
        ->check(CLI::ExistingFile);
    sub->add_option("--compare", config.compare_path, "second policy JSON for eval")
        ->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : erlq::exit_code::kInput;
  }
  return erlq::run(config, std::cout, std::cerr);
}
