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

// Command dispatch behind the `erlq` executable. Kept in the library so the
// commands can be driven in-process by tests.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "erlq/game_io.hpp"
#include "erlq/nash_solver.hpp"

namespace erlq {

enum class Command { kSolveExact, kSolvePo, kCheck, kAugment, kEval, kSimulate, kRandgen };

struct RunConfig {
  Command command = Command::kSolveExact;
  std::string spec_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int inner_iters = 500;
  double stop_tol = 1e-10;
  double delta_init = 1e-3;
  double growth = 2.0;
  int max_rounds = 30;
  int n_traj = 1000;
  double margin = 0.0;
  std::string policy_path;   // eval / simulate; exact NE when empty
  std::string compare_path;  // eval
  // randgen
  int num_agents = 2;
  int horizon = 3;
  int state_dim = 2;
  int action_dim = 1;
  double scale = 0.5;
  double tau = 1.0;
};

namespace exit_code {
constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kInput = 2;
constexpr int kSolver = 3;
constexpr int kIo = 4;
}  // namespace exit_code

namespace detail {

inline std::string out_path(const RunConfig& config, const char* name) {
  return (std::filesystem::path(config.out_dir) / name).string();
}

inline void ensure_out_dir(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.out_dir + ": " + ec.message());
}

inline Json condition_to_json(const ConditionRecord& rec) {
  Json doc;
  doc["gamma_B"] = rec.gamma_B;
  doc["gamma_P_star"] = rec.gamma_P_star;
  doc["threshold"] = rec.threshold;
  doc["margin"] = rec.margin;
  doc["tau"] = rec.tau;
  doc["satisfied"] = rec.satisfied;
  return doc;
}

inline Json agent_value_to_json(int agent, const AgentValue& value) {
  Json doc;
  doc["agent"] = agent;
  doc["J"] = value.J;
  doc["J_at_mean"] = value.J_at_mean;
  doc["P"] = sequence_to_json(value.P);
  doc["q"] = value.q;
  return doc;
}

inline std::string trace_csv(const SolveReport& report) {
  std::ostringstream out;
  out << "t,l,distance,contraction_modulus\n";
  for (std::size_t t = 0; t < report.trace.size(); ++t) {
    for (std::size_t l = 0; l < report.trace[t].size(); ++l) {
      out << t << "," << l + 1 << "," << format_double(report.trace[t][l]) << ","
          << format_double(report.contraction_moduli[t]) << "\n";
    }
  }
  return out.str();
}

inline JointPolicy policy_or_ne(const GameSpec& spec, const std::string& path) {
  if (path.empty()) return exact_ne(spec).policy;
  return load_policy(read_file(path), spec);
}

inline void print_policy_stage0(std::ostream& out, const JointPolicy& joint) {
  for (int i = 0; i < joint.num_agents(); ++i) {
    out << "  agent " << i << ": K_0 = "
        << joint.gain(i, 0).format(Eigen::IOFormat(8, 0, ", ", "; ", "", "", "[", "]"))
        << ", Sigma_0 = "
        << joint.cov(i, 0).format(Eigen::IOFormat(8, 0, ", ", "; ", "", "", "[", "]")) << "\n";
  }
}

inline void run_command(const RunConfig& config, std::ostream& out) {
  if (config.command == Command::kRandgen) {
    GameSpec spec = random_game(config.num_agents, config.horizon, config.state_dim,
                                config.action_dim, config.seed, config.scale);
    spec.tau = config.tau;
    validate(spec);
    ensure_out_dir(config);
    write_file(out_path(config, "spec.json"), serialize_game_spec(spec));
    out << "wrote " << out_path(config, "spec.json") << "\n";
    return;
  }

  if (config.spec_path.empty()) throw SpecError("--spec", "a spec file is required");
  const GameSpec spec = load_game_spec(read_file(config.spec_path));
  out << std::setprecision(10);

  switch (config.command) {
    case Command::kSolveExact: {
      const NESolution sol = exact_ne(spec);
      ensure_out_dir(config);
      write_file(out_path(config, "policy.json"), serialize_policy(sol.policy));
      const ValueCertificate cert = value_certificate(spec, sol.policy);
      Json doc;
      doc["agents"] = Json::array();
      for (int i = 0; i < spec.num_agents; ++i) {
        Json entry = agent_value_to_json(i, cert.agents[i]);
        entry["P"] = sequence_to_json(sol.riccati[i]);
        entry["q"] = sol.offsets[i];
        doc["agents"].push_back(std::move(entry));
      }
      write_file(out_path(config, "certificate.json"), doc.dump(2) + "\n");
      out << "exact NE (" << spec.num_agents << (spec.num_agents == 1 ? " agent" : " agents")
          << ", horizon " << spec.horizon << ")\n";
      print_policy_stage0(out, sol.policy);
      for (int i = 0; i < spec.num_agents; ++i)
        out << "  J[" << i << "] = " << cert.agents[i].J << "\n";
      break;
    }
    case Command::kSolvePo: {
      const SolveReport report = po_solve(spec, {config.inner_iters, config.stop_tol});
      ensure_out_dir(config);
      write_file(out_path(config, "policy.json"), serialize_policy(report.policy));
      write_file(out_path(config, "trace.csv"), trace_csv(report));
      out << "policy optimization (L = " << config.inner_iters << ", stop_tol = " << config.stop_tol
          << ")\n";
      for (int t = 0; t < spec.horizon; ++t) {
        out << "  stage " << t << ": " << report.trace[t].size() << " iterations, final distance "
            << report.trace[t].back() << ", contraction modulus " << report.contraction_moduli[t]
            << "\n";
      }
      print_policy_stage0(out, report.policy);
      break;
    }
    case Command::kCheck: {
      const ConditionRecord rec = check_assumption_tau(spec, exact_ne(spec), config.margin);
      ensure_out_dir(config);
      write_file(out_path(config, "condition.json"), condition_to_json(rec).dump(2) + "\n");
      out << "gamma_B = " << rec.gamma_B << ", gamma_P* = " << rec.gamma_P_star
          << ", threshold = " << rec.threshold << ", tau = " << rec.tau << ": "
          << (rec.satisfied ? "satisfied" : "NOT satisfied") << "\n";
      break;
    }
    case Command::kAugment: {
      AugmentOptions options;
      options.delta_init = config.delta_init;
      options.growth = config.growth;
      options.max_rounds = config.max_rounds;
      options.margin = config.margin;
      options.po = {config.inner_iters, config.stop_tol};
      const SolveReport report = delta_augment_solve(spec, options);
      ensure_out_dir(config);
      write_file(out_path(config, "policy.json"), serialize_policy(report.policy));
      write_file(out_path(config, "trace.csv"), trace_csv(report));
      Json doc = condition_to_json(*report.condition);
      doc["delta_used"] = *report.delta_used;
      doc["original_exploitability"] = report.exploitability;
      write_file(out_path(config, "condition.json"), doc.dump(2) + "\n");
      out << "delta = " << *report.delta_used << " (tau " << spec.tau << " -> "
          << report.condition->tau << ")\n";
      for (int i = 0; i < spec.num_agents; ++i) {
        out << "  original-game exploitability[" << i << "] = " << report.exploitability[i] << "\n";
      }
      break;
    }
    case Command::kEval: {
      const JointPolicy joint = policy_or_ne(spec, config.policy_path);
      const ValueCertificate cert = value_certificate(spec, joint);
      const std::vector<double> gaps = exploitability(spec, joint);
      Json doc;
      doc["agents"] = Json::array();
      for (int i = 0; i < spec.num_agents; ++i) {
        Json entry = agent_value_to_json(i, cert.agents[i]);
        entry["exploitability"] = gaps[i];
        doc["agents"].push_back(std::move(entry));
        out << "  agent " << i << ": J = " << cert.agents[i].J << ", exploitability = " << gaps[i]
            << "\n";
      }
      if (!config.compare_path.empty()) {
        const JointPolicy other = load_policy(read_file(config.compare_path), spec);
        Json cmp;
        cmp["path"] = config.compare_path;
        cmp["distance"] = policy_distance(joint, other);
        Json stages = Json::array();
        for (int t = 0; t < spec.horizon; ++t) stages.push_back(stage_distance(joint, other, t));
        cmp["stage_distances"] = stages;
        out << "  policy distance to " << config.compare_path << " = "
            << policy_distance(joint, other) << "\n";
        doc["compare"] = std::move(cmp);
      }
      ensure_out_dir(config);
      write_file(out_path(config, "certificate.json"), doc.dump(2) + "\n");
      break;
    }
    case Command::kSimulate: {
      const JointPolicy joint = policy_or_ne(spec, config.policy_path);
      const SimulationResult result = simulate(spec, joint, config.n_traj, config.seed);
      const ValueCertificate cert = value_certificate(spec, joint);
      ensure_out_dir(config);
      std::ostringstream traj, costs;
      write_trajectories_csv(traj, spec, result);
      write_costs_csv(costs, result, cert);
      write_file(out_path(config, "trajectories.csv"), traj.str());
      write_file(out_path(config, "costs.csv"), costs.str());
      for (int i = 0; i < spec.num_agents; ++i) {
        out << "  agent " << i << ": empirical " << result.mean_cost[i] << " +/- "
            << result.std_error[i] << ", certificate " << cert.agents[i].J << "\n";
      }
      break;
    }
    case Command::kRandgen:
      break;
  }
}

}  // namespace detail

/// Runs one command. Returns 0 on success, 2 for input/validation errors,
/// 3 for solver failures, 4 for I/O errors.
inline int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    detail::run_command(config, out);
    return exit_code::kOk;
  } catch (const SpecError& e) {
    err << "input error: " << e.what() << "\n";
    return exit_code::kInput;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << "\n";
    return exit_code::kInput;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return exit_code::kSolver;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return exit_code::kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kInternal;
  }
}

}  // namespace erlq
