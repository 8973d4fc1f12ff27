#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "parking/harness.hpp"

using namespace parking;

namespace {

ScenarioConfig preset(const std::string& name) {
  return load_config(std::string(PARKQ_TEST_PRESET_DIR) + "/" + name + ".json");
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream lines(csv);
  std::string line;
  while (std::getline(lines, line)) {
    std::vector<std::string> fields;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) fields.push_back(cell);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    out.push_back(fields);
  }
  return out;
}

ScenarioConfig small_sim(ScenarioConfig cfg) {
  cfg.simulation.horizon = 5000.0;
  cfg.simulation.warmup = 500.0;
  cfg.simulation.seeds = {1, 2, 3};
  cfg.simulation.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(1234567891.0) == "1.23456789e+09");
}

TEST_CASE("analyze reports levels and prices") {
  auto cfg = preset("table1_row1");
  cfg.costs.wait_cost = 1.5;
  cfg.congestion_limit = 9;
  const auto out = cmd_analyze(cfg);
  const auto table = rows(out.csv);
  CHECK(out.csv.rfind("scenario_id,quantity,index,value\n", 0) == 0);
  std::map<std::string, std::string> values;
  for (const auto& r : table) {
    REQUIRE(r.size() == 4);
    if (r[2].empty()) values[r[1]] = r[3];
  }
  CHECK(values["balking_level"] == "11");
  CHECK(values.count("price_social_upper") == 1);
  // The congestion price must induce the requested level.
  const double mid =
      0.5 * (std::stod(values["price_congestion_lower"]) + std::stod(values["price_congestion_upper"]));
  CHECK(balking_level(cfg.queue, cfg.costs.with_park_cost(mid)) == 9);
  CHECK(values["welfare_ordering_holds"] == "1");
  CHECK(values["welfare_unimodal"] == "1");
}

TEST_CASE("equilibrium row schema") {
  const auto cfg = preset("table1_row1");
  const auto out = cmd_equilibrium(cfg, SolutionKind::social_optimum);
  const auto table = rows(out.csv);
  REQUIRE(table.size() == 2);
  CHECK(out.csv.rfind("scenario_id,kind,P_o,P_b,P_j,U_o,U_b,U_j,welfare,residual,converged\n", 0) == 0);
  REQUIRE(table[1].size() == 11);
  CHECK(table[1][0] == scenario_id(cfg));
  CHECK(table[1][1] == "social");
  CHECK(table[1][10] == "true");
  CHECK(std::abs(std::stod(table[1][8]) - 2.80) <= 0.15);
}

TEST_CASE("free observation through the command") {
  auto cfg = preset("table1_row1");
  cfg.costs.observe_cost = 0.0;
  const auto table = rows(cmd_equilibrium(cfg, SolutionKind::nash).csv);
  CHECK(std::stod(table[1][2]) >= 0.99);
}

TEST_CASE("simulate emits seeds then aggregates") {
  const auto cfg = small_sim(preset("table1_row1"));
  const auto table = rows(cmd_simulate(cfg, SolutionKind::social_optimum).csv);
  REQUIRE(table.size() == 1 + 3 + 2);
  CHECK(table[0].size() == 16);
  CHECK(table[1][2] == "1");
  CHECK(table[4][2] == "mean");
  CHECK(table[5][2] == "stderr");
  for (const auto& r : table) CHECK(r.size() == 16);
}

TEST_CASE("simulate output is byte-identical across runs") {
  const auto cfg = small_sim(preset("table1_row4"));
  CHECK(cmd_simulate(cfg, SolutionKind::nash).csv == cmd_simulate(cfg, SolutionKind::nash).csv);
}

TEST_CASE("no arrivals gives zero metrics") {
  auto cfg = small_sim(preset("table1_row1"));
  cfg.queue.lambda = 0.0;
  const auto table = rows(cmd_simulate(cfg, SolutionKind::nash).csv);
  for (std::size_t i = 1; i < table.size(); ++i) {
    for (std::size_t col = 6; col < table[i].size(); ++col) CHECK(table[i][col] == "0");
  }
}

TEST_CASE("a one-point sweep repeats simulate") {
  auto cfg = small_sim(preset("fig5"));
  cfg.sweep->from = cfg.sweep->to = cfg.queue.lambda;
  cfg.sweep->steps = 1;
  const auto sweep = rows(cmd_sweep(cfg).csv);
  const auto sim = rows(cmd_simulate(cfg, SolutionKind::nash).csv);
  std::string util, wait;
  for (const auto& r : sweep) {
    if (r[3] == "nash" && r[4] == "utilization") util = r[5];
    if (r[3] == "nash" && r[4] == "avg_wait") wait = r[5];
  }
  CHECK(util == sim[4][6]);
  CHECK(wait == sim[4][7]);
}

TEST_CASE("sweep long form") {
  auto cfg = preset("fig4");
  cfg.sweep->steps = 3;
  const auto out = cmd_sweep(cfg);
  const auto table = rows(out.csv);
  CHECK(out.csv.rfind("scenario_id,parameter,sweep_value,kind,metric,value,stderr\n", 0) == 0);
  CHECK(table.size() == 1 + 3 * 2 * 9);
  CHECK(table[1][1] == "observe_cost");
  CHECK(table[1][3] == "nash");
  CHECK(table[1][4] == "P_o");
}

TEST_CASE("flow sweep reports utilization and wait") {
  auto cfg = small_sim(preset("fig3_2source"));
  cfg.sweep->steps = 2;
  const auto table = rows(cmd_sweep(cfg).csv);
  REQUIRE(table.size() == 1 + 2 * 3);
  CHECK(table[1][3] == "fixed");
  CHECK(table[1][4] == "utilization");
}

TEST_CASE("sweep requires its section") {
  CHECK_THROWS_AS(cmd_sweep(preset("table1_row1")), ConfigError);
}
