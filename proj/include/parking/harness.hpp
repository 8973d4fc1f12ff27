#pragma once

// Subcommand bodies shared by the CLI and the tests. Each returns the CSV
// text plus a short human-readable report; neither touches stdout.
//
// CSV columns, in order:
//   analyze      scenario_id,quantity,index,value
//   equilibrium  scenario_id,kind,P_o,P_b,P_j,U_o,U_b,U_j,welfare,residual,converged
//   simulate     scenario_id,kind,seed,P_o,P_b,P_j,utilization,avg_wait,welfare_rate,
//                arrived,balked,joined_blind,observed,observed_balked,
//                rejected_at_capacity,parked
//                (one row per seed, then rows with seed "mean" and "stderr")
//   sweep        scenario_id,parameter,sweep_value,kind,metric,value,stderr

#include <string>

#include "parking/scenario_config.hpp"

namespace parking {

struct CommandOutput {
  std::string csv;
  std::string report;
};

/// Nine significant digits, "%.9g".
std::string format_number(double value);

CommandOutput cmd_analyze(const ScenarioConfig& config);
CommandOutput cmd_equilibrium(const ScenarioConfig& config, SolutionKind kind);
CommandOutput cmd_simulate(const ScenarioConfig& config, SolutionKind kind);
CommandOutput cmd_sweep(const ScenarioConfig& config);

/// Solves the requested equilibrium for `config`.
EquilibriumResult solve(const ScenarioConfig& config, SolutionKind kind);

}  // namespace parking
