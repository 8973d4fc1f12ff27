#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "parking/scenario_config.hpp"

using namespace parking;

namespace {

const char* kMinimal = R"({
  "queue": {"arrival_rate": "1/5", "service_rate": "1/120", "spots": 30, "capacity": 100},
  "costs": {"reward": 75, "wait_cost": 1.5, "park_cost": 0.05, "observe_cost": 0.25},
  "network": {"topology": "complete", "count": 3, "sources": [0, 1, 2]}
})";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const auto cfg = parse_config(kMinimal);
  CHECK(cfg.queue.lambda == doctest::Approx(0.2));
  CHECK(cfg.queue.mu == doctest::Approx(1.0 / 120.0));
  CHECK(cfg.network.blockfaces.size() == 3);
  CHECK(cfg.network.streets.size() == 6);
  CHECK(cfg.network.blockfaces[0].spots == 10);
  CHECK(cfg.simulation.warmup == doctest::Approx(0.1 * cfg.simulation.horizon));
  CHECK(cfg.nash.gamma == 0.9);
  CHECK(cfg.social.grid_resolution == 200);
  CHECK_FALSE(cfg.sweep.has_value());
}

TEST_CASE("round trip is the identity") {
  const auto dir = std::filesystem::path(PARKQ_TEST_PRESET_DIR);
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    CAPTURE(entry.path().string());
    const auto once = load_config(entry.path().string());
    const auto text = serialize_config(once);
    const auto twice = parse_config(text);
    CHECK(once == twice);
    CHECK(serialize_config(twice) == text);
    ++seen;
  }
  CHECK(seen >= 10);
}

TEST_CASE("errors name the offending field") {
  CHECK(error_of(replace(kMinimal, R"("service_rate": "1/120", )", "")).find("service_rate") !=
        std::string::npos);
  CHECK(error_of(replace(kMinimal, R"("reward": 75)", R"("reward": -1)")).find("costs.reward") !=
        std::string::npos);
  CHECK(error_of(replace(kMinimal, R"("spots": 30)", R"("spots": 31)")).find("network.count") !=
        std::string::npos);
  CHECK(error_of(replace(kMinimal, R"("capacity": 100)", R"("capacity": 100, "colour": 1)"))
            .find("queue.colour") != std::string::npos);
  CHECK(error_of(replace(kMinimal, R"("1/5")", R"("1/x")")).find("queue.arrival_rate") !=
        std::string::npos);
  CHECK(error_of(replace(kMinimal, R"("observe_cost": 0.25})",
                         R"("observe_cost": 0.25}, "outside_option": "offstreet")"))
            .find("offstreet_cost") != std::string::npos);
  CHECK(error_of("{ not json").find("config") != std::string::npos);
}

TEST_CASE("solver and simulation sections are validated") {
  const std::string base = replace(kMinimal, R"("network")",
                                   R"("solver": {"start": [0.5, 0.5, 0.5]}, "network")");
  CHECK(error_of(base).find("solver.start") != std::string::npos);
  const std::string warm =
      replace(kMinimal, R"("network")", R"("simulation": {"horizon": 10, "warmup": 10}, "network")");
  CHECK(error_of(warm).find("simulation.warmup") != std::string::npos);
}

TEST_CASE("unreachable blockfaces are rejected") {
  const std::string text = R"({
    "queue": {"arrival_rate": 0.2, "service_rate": 0.01, "spots": 2, "capacity": 10},
    "costs": {"reward": 75, "wait_cost": 1.5},
    "network": {"blockfaces": [{"id": 0, "spots": 1}, {"id": 1, "spots": 1}],
                "streets": [{"from": 1, "to": 0}], "sources": [0]}
  })";
  CHECK(error_of(text).find("unreachable") != std::string::npos);
}

TEST_CASE("sweep values") {
  SweepSettings sw{"arrival_rate", 0.025, 0.225, 9, SweepMode::game, false};
  const auto v = sw.values();
  REQUIRE(v.size() == 9);
  CHECK(v.front() == 0.025);
  CHECK(v.back() == doctest::Approx(0.225));
  sw.steps = 1;
  CHECK(sw.values() == std::vector<double>{0.025});
}

TEST_CASE("scenario id tracks content") {
  const auto a = parse_config(kMinimal);
  auto b = a;
  CHECK(scenario_id(a) == scenario_id(b));
  CHECK(scenario_id(a).size() == 16);
  b.simulation.seeds = {1, 2};
  CHECK(scenario_id(a) != scenario_id(b));
}

TEST_CASE("preset lookup honours the environment") {
  setenv(kPresetDirEnv, PARKQ_TEST_PRESET_DIR, 1);
  CHECK(std::filesystem::exists(preset_path("table1_row1")));
  CHECK_THROWS_AS(preset_path("no_such_preset"), ConfigError);
  setenv(kPresetDirEnv, "/nonexistent", 1);
  CHECK_THROWS_AS(preset_path("table1_row1"), ConfigError);
  unsetenv(kPresetDirEnv);
  CHECK(std::filesystem::exists(preset_path("table1_row1")));
}
