#include "parking/scenario_config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#ifndef PARKQ_DEFAULT_PRESET_DIR
#define PARKQ_DEFAULT_PRESET_DIR "presets"
#endif

namespace parking {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

// Reads one section, rejecting keys it does not know.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  bool has(const std::string& key) const {
    seen_.insert(key);
    return node_.contains(key);
  }

  const json& at(const std::string& key) const {
    seen_.insert(key);
    if (!node_.contains(key)) fail(join_path(path_, key), "missing required field");
    return node_.at(key);
  }

  std::string path(const std::string& key) const { return join_path(path_, key); }

  double number(const std::string& key) const { return to_number(at(key), path(key)); }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  long long integer(const std::string& key) const { return to_integer(at(key), path(key)); }

  long long integer_or(const std::string& key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::string string(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) fail(path(it.key()), "unknown field");
    }
  }

  static double to_number(const json& v, const std::string& where) {
    double out = 0.0;
    if (v.is_number()) {
      out = v.get<double>();
    } else if (v.is_string()) {
      const auto text = v.get<std::string>();
      const auto slash = text.find('/');
      try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
          out = std::stod(text, &used);
          if (used != text.size()) throw std::invalid_argument(text);
        } else {
          const auto num = text.substr(0, slash), den = text.substr(slash + 1);
          std::size_t used_den = 0;
          out = std::stod(num, &used) / std::stod(den, &used_den);
          if (used != num.size() || used_den != den.size()) throw std::invalid_argument(text);
        }
      } catch (const std::exception&) {
        fail(where, "cannot read '" + text + "' as a number");
      }
    } else {
      fail(where, "expected a number");
    }
    if (!std::isfinite(out)) fail(where, "must be finite");
    return out;
  }

  static long long to_integer(const json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    fail(where, "expected an integer");
  }

 private:
  const json& node_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

int as_int(long long v, const std::string& where) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    fail(where, "out of range");
  }
  return static_cast<int>(v);
}

Strategy parse_strategy(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) fail(where, "expected [P_o, P_b, P_j]");
  Strategy s{Section::to_number(v[0], where + "[0]"), Section::to_number(v[1], where + "[1]"),
             Section::to_number(v[2], where + "[2]")};
  try {
    s.validate(1e-9);
  } catch (const ParameterError& e) {
    fail(where, e.what());
  }
  return s;
}

json strategy_json(const Strategy& s) { return json::array({s.p_observe, s.p_balk, s.p_join}); }

OutsideOption parse_option(const std::string& text, const std::string& where) {
  if (text == "zero") return OutsideOption::zero;
  if (text == "offstreet") return OutsideOption::offstreet;
  fail(where, "expected 'zero' or 'offstreet', got '" + text + "'");
}

std::string option_name(OutsideOption o) { return o == OutsideOption::zero ? "zero" : "offstreet"; }

BlindRouting parse_routing(const std::string& text, const std::string& where) {
  if (text == "uniform") return BlindRouting::uniform;
  if (text == "source") return BlindRouting::source;
  fail(where, "expected 'uniform' or 'source', got '" + text + "'");
}

std::string routing_name(BlindRouting r) { return r == BlindRouting::uniform ? "uniform" : "source"; }

ObserverRule parse_rule(const std::string& text, const std::string& where) {
  if (text == "system") return ObserverRule::system;
  if (text == "blockface") return ObserverRule::blockface;
  fail(where, "expected 'system' or 'blockface', got '" + text + "'");
}

std::string rule_name(ObserverRule r) { return r == ObserverRule::system ? "system" : "blockface"; }

SweepMode parse_mode(const std::string& text, const std::string& where) {
  if (text == "game") return SweepMode::game;
  if (text == "flow") return SweepMode::flow;
  fail(where, "expected 'game' or 'flow', got '" + text + "'");
}

std::string mode_name(SweepMode m) { return m == SweepMode::game ? "game" : "flow"; }

const std::set<std::string> kSweepParameters = {"arrival_rate", "observe_cost", "park_cost",
                                                "wait_cost",    "reward",       "offstreet_cost"};

void parse_queue(const json& node, ScenarioConfig& cfg) {
  Section s(node, "queue");
  cfg.queue.lambda = s.number("arrival_rate");
  cfg.queue.mu = s.number("service_rate");
  cfg.queue.c = as_int(s.integer("spots"), s.path("spots"));
  cfg.queue.n = as_int(s.integer("capacity"), s.path("capacity"));
  s.finish();
  if (cfg.queue.lambda < 0.0) fail(s.path("arrival_rate"), "must be >= 0");
  if (!(cfg.queue.mu > 0.0)) fail(s.path("service_rate"), "must be > 0");
  if (cfg.queue.c < 1) fail(s.path("spots"), "must be >= 1");
  if (cfg.queue.n < cfg.queue.c) fail(s.path("capacity"), "must be >= queue.spots");
}

void parse_costs(const json& node, ScenarioConfig& cfg) {
  Section s(node, "costs");
  cfg.costs.reward = s.number("reward");
  cfg.costs.wait_cost = s.number("wait_cost");
  cfg.costs.park_cost = s.number_or("park_cost", 0.0);
  cfg.costs.observe_cost = s.number_or("observe_cost", 0.0);
  if (s.has("offstreet_cost")) cfg.costs.offstreet_cost = s.number("offstreet_cost");
  s.finish();
  if (!(cfg.costs.reward > 0.0)) fail(s.path("reward"), "must be > 0");
  if (!(cfg.costs.wait_cost > 0.0)) fail(s.path("wait_cost"), "must be > 0");
  if (cfg.costs.park_cost < 0.0) fail(s.path("park_cost"), "must be >= 0");
  if (cfg.costs.offstreet_cost && *cfg.costs.offstreet_cost < 0.0) {
    fail(s.path("offstreet_cost"), "must be >= 0");
  }
}

void parse_solver(const json& node, ScenarioConfig& cfg) {
  Section s(node, "solver");
  cfg.nash.eps = s.number_or("eps", cfg.nash.eps);
  cfg.nash.delta = s.number_or("delta", cfg.nash.delta);
  cfg.nash.gamma = s.number_or("gamma", cfg.nash.gamma);
  if (s.has("start")) cfg.nash.start = parse_strategy(s.at("start"), s.path("start"));
  cfg.nash.max_iters = as_int(s.integer_or("max_iters", cfg.nash.max_iters), s.path("max_iters"));
  cfg.social.grid_resolution =
      as_int(s.integer_or("grid_resolution", cfg.social.grid_resolution), s.path("grid_resolution"));
  cfg.social.min_step = s.number_or("min_step", cfg.social.min_step);
  s.finish();
  if (!(cfg.nash.eps > 0.0)) fail(s.path("eps"), "must be > 0");
  if (!(cfg.nash.delta > 0.0)) fail(s.path("delta"), "must be > 0");
  if (!(cfg.nash.gamma > 0.0 && cfg.nash.gamma < 1.0)) fail(s.path("gamma"), "must lie in (0,1)");
  if (cfg.nash.max_iters < 1) fail(s.path("max_iters"), "must be >= 1");
  if (cfg.social.grid_resolution < 10) fail(s.path("grid_resolution"), "must be >= 10");
  if (!(cfg.social.min_step > 0.0)) fail(s.path("min_step"), "must be > 0");
}

void parse_network(const json& node, ScenarioConfig& cfg) {
  Section s(node, "network");
  auto& net = cfg.network;
  if (s.has("topology")) {
    // Shorthand for a complete graph that splits queue.spots evenly.
    if (s.string("topology") != "complete") fail(s.path("topology"), "only 'complete' is supported");
    if (s.has("blockfaces") || s.has("streets")) {
      fail(s.path("topology"), "cannot be combined with explicit blockfaces or streets");
    }
    const int count = as_int(s.integer("count"), s.path("count"));
    const double drive = s.number_or("drive_time", 1.0);
    if (count < 1) fail(s.path("count"), "must be >= 1");
    if (cfg.queue.c % count != 0) fail(s.path("count"), "must divide queue.spots");
    if (!(drive > 0.0)) fail(s.path("drive_time"), "must be > 0");
    const auto complete = NetworkScenario::complete(count, cfg.queue.c / count, drive);
    net.blockfaces = complete.blockfaces;
    net.streets = complete.streets;
  } else {
    const auto& bfs = s.at("blockfaces");
    if (!bfs.is_array() || bfs.empty()) fail(s.path("blockfaces"), "expected a nonempty list");
    for (std::size_t i = 0; i < bfs.size(); ++i) {
      Section b(bfs[i], s.path("blockfaces") + "[" + std::to_string(i) + "]");
      net.blockfaces.push_back({as_int(b.integer("id"), b.path("id")),
                                as_int(b.integer("spots"), b.path("spots"))});
      b.finish();
    }
    const auto& sts = s.at("streets");
    if (!sts.is_array()) fail(s.path("streets"), "expected a list");
    for (std::size_t i = 0; i < sts.size(); ++i) {
      Section e(sts[i], s.path("streets") + "[" + std::to_string(i) + "]");
      net.streets.push_back({as_int(e.integer("from"), e.path("from")),
                             as_int(e.integer("to"), e.path("to")), e.number_or("drive_time", 1.0)});
      e.finish();
    }
  }
  const auto& src = s.at("sources");
  if (!src.is_array()) fail(s.path("sources"), "expected a list of blockface ids");
  for (std::size_t i = 0; i < src.size(); ++i) {
    net.sources.push_back(as_int(Section::to_integer(src[i], s.path("sources")), s.path("sources")));
  }
  net.entry_drive_time = s.number_or("entry_drive_time", net.entry_drive_time);
  if (s.has("blind_routing")) {
    net.blind_routing = parse_routing(s.string("blind_routing"), s.path("blind_routing"));
  }
  if (s.has("observer_rule")) {
    net.observer_rule = parse_rule(s.string("observer_rule"), s.path("observer_rule"));
  }
  s.finish();

  int spots = 0;
  for (const auto& b : net.blockfaces) spots += b.spots;
  if (spots != cfg.queue.c) fail(s.path("blockfaces"), "spots must add up to queue.spots");
  if (net.entry_drive_time < 0.0) fail(s.path("entry_drive_time"), "must be >= 0");
  cfg.network_scenario(Strategy{0.0, 0.0, 1.0}, 0).validate();
}

void parse_simulation(const json& node, ScenarioConfig& cfg) {
  Section s(node, "simulation");
  auto& sim = cfg.simulation;
  sim.horizon = s.number_or("horizon", sim.horizon);
  sim.warmup = s.number_or("warmup", 0.1 * sim.horizon);
  if (s.has("seeds")) {
    const auto& seeds = s.at("seeds");
    if (!seeds.is_array() || seeds.empty()) fail(s.path("seeds"), "expected a nonempty list");
    sim.seeds.clear();
    for (const auto& v : seeds) {
      if (!v.is_number_unsigned()) fail(s.path("seeds"), "seeds must be nonnegative integers");
      sim.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  const long long threads = s.integer_or("threads", 0);
  if (threads < 0 || threads > 1024) fail(s.path("threads"), "must lie in [0, 1024]");
  sim.threads = static_cast<unsigned>(threads);
  if (s.has("strategy")) sim.strategy = parse_strategy(s.at("strategy"), s.path("strategy"));
  s.finish();
  if (!(sim.horizon > 0.0)) fail(s.path("horizon"), "must be > 0");
  if (!(sim.warmup >= 0.0 && sim.warmup < sim.horizon)) {
    fail(s.path("warmup"), "must lie in [0, simulation.horizon)");
  }
}

void parse_sweep(const json& node, ScenarioConfig& cfg) {
  Section s(node, "sweep");
  SweepSettings sw;
  sw.parameter = s.string("parameter");
  sw.from = s.number("from");
  sw.to = s.number("to");
  sw.steps = as_int(s.integer("steps"), s.path("steps"));
  if (s.has("mode")) sw.mode = parse_mode(s.string("mode"), s.path("mode"));
  sw.simulate = s.boolean_or("simulate", sw.mode == SweepMode::flow);
  s.finish();
  if (!kSweepParameters.count(sw.parameter)) {
    fail(s.path("parameter"), "unknown parameter '" + sw.parameter + "'");
  }
  if (sw.steps < 1) fail(s.path("steps"), "must be >= 1");
  if (sw.mode == SweepMode::flow) {
    if (!cfg.simulation.strategy) fail("simulation.strategy", "required by a flow sweep");
    if (!sw.simulate) fail(s.path("simulate"), "a flow sweep always simulates");
  }
  cfg.sweep = sw;
}

}  // namespace

std::vector<double> SweepSettings::values() const {
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) {
    out.push_back(steps == 1 ? from : from + (to - from) * i / (steps - 1));
  }
  return out;
}

ScenarioConfig ScenarioConfig::with_parameter(const std::string& parameter, double value) const {
  ScenarioConfig out = *this;
  if (parameter == "arrival_rate") {
    out.queue.lambda = value;
  } else if (parameter == "observe_cost") {
    out.costs.observe_cost = value;
  } else if (parameter == "park_cost") {
    out.costs.park_cost = value;
  } else if (parameter == "wait_cost") {
    out.costs.wait_cost = value;
  } else if (parameter == "reward") {
    out.costs.reward = value;
  } else if (parameter == "offstreet_cost") {
    out.costs.offstreet_cost = value;
  } else {
    throw ConfigError("sweep.parameter: unknown parameter '" + parameter + "'");
  }
  return out;
}

GameSpec ScenarioConfig::game_spec() const { return GameSpec::make(queue, costs, outside_option); }

NetworkScenario ScenarioConfig::network_scenario(const Strategy& strategy,
                                                 int balk_threshold) const {
  NetworkScenario sc;
  sc.blockfaces = network.blockfaces;
  sc.streets = network.streets;
  sc.sources = network.sources;
  sc.arrival_rate = queue.lambda;
  sc.service_rate = queue.mu;
  sc.strategy = strategy;
  sc.balk_threshold = balk_threshold;
  sc.capacity = queue.n;
  sc.entry_drive_time = network.entry_drive_time;
  sc.blind_routing = network.blind_routing;
  sc.observer_rule = network.observer_rule;
  sc.costs = costs;
  sc.outside_option = outside_option;
  return sc;
}

bool operator==(const Strategy& a, const Strategy& b) {
  return a.p_observe == b.p_observe && a.p_balk == b.p_balk && a.p_join == b.p_join;
}

bool operator==(const Blockface& a, const Blockface& b) { return a.id == b.id && a.spots == b.spots; }

bool operator==(const Street& a, const Street& b) {
  return a.from == b.from && a.to == b.to && a.drive_time == b.drive_time;
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  // Canonical forms carry every field, so equal text means equal configs.
  return serialize_config(*this) == serialize_config(o);
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  Section s(root, "");
  ScenarioConfig cfg;
  if (s.has("name")) cfg.name = s.string("name");
  parse_queue(s.at("queue"), cfg);
  parse_costs(s.at("costs"), cfg);
  if (s.has("outside_option")) {
    cfg.outside_option = parse_option(s.string("outside_option"), "outside_option");
  }
  if (cfg.outside_option == OutsideOption::offstreet && !cfg.costs.offstreet_cost) {
    fail("costs.offstreet_cost", "required when outside_option is 'offstreet'");
  }
  if (s.has("congestion_limit")) {
    cfg.congestion_limit = as_int(s.integer("congestion_limit"), "congestion_limit");
    if (*cfg.congestion_limit < 1) fail("congestion_limit", "must be >= 1");
  }
  if (s.has("solver")) parse_solver(s.at("solver"), cfg);
  parse_network(s.at("network"), cfg);
  if (s.has("simulation")) parse_simulation(s.at("simulation"), cfg);
  if (s.has("sweep")) parse_sweep(s.at("sweep"), cfg);
  s.finish();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string preset_path(const std::string& name) {
  const char* env = std::getenv(kPresetDirEnv);
  const std::filesystem::path dir = env && *env ? env : PARKQ_DEFAULT_PRESET_DIR;
  const auto path = dir / (name + ".json");
  if (!std::filesystem::exists(path)) {
    throw ConfigError("preset: '" + name + "' not found in " + dir.string());
  }
  return path.string();
}

std::string serialize_config(const ScenarioConfig& cfg) {
  json root;
  root["name"] = cfg.name;
  root["queue"] = {{"arrival_rate", cfg.queue.lambda},
                   {"service_rate", cfg.queue.mu},
                   {"spots", cfg.queue.c},
                   {"capacity", cfg.queue.n}};
  json costs = {{"reward", cfg.costs.reward},
                {"wait_cost", cfg.costs.wait_cost},
                {"park_cost", cfg.costs.park_cost},
                {"observe_cost", cfg.costs.observe_cost}};
  if (cfg.costs.offstreet_cost) costs["offstreet_cost"] = *cfg.costs.offstreet_cost;
  root["costs"] = costs;
  root["outside_option"] = option_name(cfg.outside_option);
  if (cfg.congestion_limit) root["congestion_limit"] = *cfg.congestion_limit;
  root["solver"] = {{"eps", cfg.nash.eps},
                    {"delta", cfg.nash.delta},
                    {"gamma", cfg.nash.gamma},
                    {"start", strategy_json(cfg.nash.start)},
                    {"max_iters", cfg.nash.max_iters},
                    {"grid_resolution", cfg.social.grid_resolution},
                    {"min_step", cfg.social.min_step}};

  json net;
  net["blockfaces"] = json::array();
  for (const auto& b : cfg.network.blockfaces) {
    net["blockfaces"].push_back({{"id", b.id}, {"spots", b.spots}});
  }
  net["streets"] = json::array();
  for (const auto& e : cfg.network.streets) {
    net["streets"].push_back({{"from", e.from}, {"to", e.to}, {"drive_time", e.drive_time}});
  }
  net["sources"] = cfg.network.sources;
  net["entry_drive_time"] = cfg.network.entry_drive_time;
  net["blind_routing"] = routing_name(cfg.network.blind_routing);
  net["observer_rule"] = rule_name(cfg.network.observer_rule);
  root["network"] = net;

  json sim = {{"horizon", cfg.simulation.horizon},
              {"warmup", cfg.simulation.warmup},
              {"seeds", cfg.simulation.seeds},
              {"threads", cfg.simulation.threads}};
  if (cfg.simulation.strategy) sim["strategy"] = strategy_json(*cfg.simulation.strategy);
  root["simulation"] = sim;

  if (cfg.sweep) {
    root["sweep"] = {{"parameter", cfg.sweep->parameter}, {"from", cfg.sweep->from},
                     {"to", cfg.sweep->to},               {"steps", cfg.sweep->steps},
                     {"mode", mode_name(cfg.sweep->mode)}, {"simulate", cfg.sweep->simulate}};
  }
  return root.dump();
}

std::string scenario_id(const ScenarioConfig& config) {
  const std::string text = serialize_config(config);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace parking
