#pragma once

// Scenario configuration: one JSON document with nested sections. Every
// field is checked on load and errors name the offending key by its dotted
// path, e.g. "queue.service_rate".
//
// Rates may be written as numbers or as "a/b" strings ("1/120").

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parking/costly_game.hpp"
#include "parking/netflow_sim.hpp"

namespace parking {

/// Environment variable naming the directory searched by --preset.
inline constexpr const char* kPresetDirEnv = "PARKQ_PRESET_DIR";

struct NetworkSettings {
  std::vector<Blockface> blockfaces;
  std::vector<Street> streets;
  std::vector<int> sources;
  double entry_drive_time = 1.0;
  BlindRouting blind_routing = BlindRouting::uniform;
  ObserverRule observer_rule = ObserverRule::blockface;
};

struct SimulationSettings {
  double horizon = 1e5;
  double warmup = 1e4;  // defaults to 10% of the horizon when omitted
  std::vector<std::uint64_t> seeds{1};
  unsigned threads = 0;  // 0: one per hardware thread
  std::optional<Strategy> strategy;  // fixed strategy for flow sweeps
};

enum class SweepMode {
  game,  // solve both equilibria per point, optionally simulate them
  flow,  // simulate the fixed simulation.strategy per point
};

struct SweepSettings {
  std::string parameter;  // arrival_rate, observe_cost, park_cost, wait_cost, reward, offstreet_cost
  double from = 0.0;
  double to = 0.0;
  int steps = 2;
  SweepMode mode = SweepMode::game;
  bool simulate = false;

  std::vector<double> values() const;
};

struct ScenarioConfig {
  std::string name;
  QueueParams queue;
  CostParams costs;
  OutsideOption outside_option = OutsideOption::zero;
  std::optional<int> congestion_limit;  // n_cl
  NashSettings nash;
  SocialOptimumSettings social;
  NetworkSettings network;
  SimulationSettings simulation;
  std::optional<SweepSettings> sweep;

  /// Copy with one named parameter replaced; throws ConfigError for an
  /// unknown name.
  ScenarioConfig with_parameter(const std::string& parameter, double value) const;

  GameSpec game_spec() const;

  /// Network scenario driven by `strategy` with the given balk threshold.
  NetworkScenario network_scenario(const Strategy& strategy, int balk_threshold) const;

  bool operator==(const ScenarioConfig&) const;
};

bool operator==(const Strategy& a, const Strategy& b);
bool operator==(const Blockface& a, const Blockface& b);
bool operator==(const Street& a, const Street& b);

/// Parses and validates. Throws ConfigError on any problem.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Resolves a preset name against $PARKQ_PRESET_DIR, falling back to the
/// directory compiled into the binary.
std::string preset_path(const std::string& name);

/// Canonical JSON: every field present, keys sorted, compact.
std::string serialize_config(const ScenarioConfig& config);

/// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string scenario_id(const ScenarioConfig& config);

}  // namespace parking
