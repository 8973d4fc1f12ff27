#include <doctest.h>

#include <cmath>

#include "parking/netflow_sim.hpp"

using namespace parking;

namespace {

NetworkScenario curb(double lambda, Strategy s) {
  auto sc = NetworkScenario::complete(3, 10, 1.0);
  sc.sources = {0, 1, 2};
  sc.arrival_rate = lambda;
  sc.service_rate = 1.0 / 120.0;
  sc.strategy = s;
  sc.balk_threshold = 21;
  sc.capacity = 100;
  sc.costs = {75.0, 0.8, 0.05, 0.25, std::nullopt};
  return sc;
}

std::vector<std::uint64_t> seeds(int count) {
  std::vector<std::uint64_t> out;
  for (int i = 1; i <= count; ++i) out.push_back(static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace

TEST_CASE("no arrivals, no activity") {
  const auto m = run_simulation(curb(0.0, {0.0, 0.0, 1.0}), 1000.0, 100.0, 1);
  CHECK(m.utilization == 0.0);
  CHECK(m.avg_wait == 0.0);
  CHECK(m.drivers.arrived == 0);
  CHECK(m.welfare_rate == 0.0);
}

TEST_CASE("everyone balks") {
  const auto m = run_simulation(curb(0.2, {0.0, 1.0, 0.0}), 5000.0, 500.0, 2);
  CHECK(m.utilization == 0.0);
  CHECK(m.drivers.balked == m.drivers.arrived);
  CHECK(m.drivers.arrived > 0);
  CHECK(m.welfare_rate == 0.0);
}

TEST_CASE("off-street balking credits the garage payoff") {
  auto sc = curb(0.2, {0.0, 1.0, 0.0});
  sc.costs = {95.0, 1.5, 0.05, 3.85, 0.962};
  sc.outside_option = OutsideOption::offstreet;
  const auto runs = run_many({sc}, seeds(5), 20000.0, 2000.0, 1);
  std::vector<double> w;
  for (const auto& m : runs) w.push_back(m.welfare_rate);
  CHECK(mean_and_se(w).mean == doctest::Approx(0.2 * (95.0 - 0.962 * 120.0)).epsilon(0.03));
}

TEST_CASE("seeded runs are reproducible") {
  const auto sc = curb(0.2, {0.5, 0.2, 0.3});
  const auto a = run_simulation(sc, 20000.0, 2000.0, 7);
  const auto b = run_simulation(sc, 20000.0, 2000.0, 7);
  CHECK(a.utilization == b.utilization);
  CHECK(a.avg_wait == b.avg_wait);
  CHECK(a.welfare_rate == b.welfare_rate);
  CHECK(a.drivers.parked == b.drivers.parked);
  const auto c = run_simulation(sc, 20000.0, 2000.0, 8);
  CHECK(a.utilization != c.utilization);
}

TEST_CASE("parallel and serial runs agree") {
  const auto sc = curb(0.2, {0.5, 0.2, 0.3});
  const auto serial = run_many({sc}, seeds(4), 5000.0, 500.0, 1);
  const auto parallel = run_many({sc}, seeds(4), 5000.0, 500.0, 4);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].seed == parallel[i].seed);
    CHECK(serial[i].utilization == parallel[i].utilization);
  }
}

TEST_CASE("every arrival is accounted for once") {
  for (auto s : {Strategy{0.85, 0.13, 0.02}, Strategy{0.2, 0.1, 0.7}, Strategy{0.0, 0.0, 1.0}}) {
    auto sc = curb(0.35, s);
    sc.capacity = 40;
    const auto m = run_simulation(sc, 20000.0, 2000.0, 3);
    const auto& d = m.drivers;
    CHECK(d.arrived == d.balked + d.joined_blind + d.observed);
    CHECK(d.observed_balked <= d.observed);
    CHECK(d.rejected_at_capacity <= d.joined_blind + d.observed - d.observed_balked);
  }
}

TEST_CASE("capacity limits hold") {
  auto sc = curb(0.6, {0.0, 0.0, 1.0});
  sc.capacity = 35;
  const auto m = run_simulation(sc, 20000.0, 2000.0, 4);
  CHECK(m.peak_in_system <= 35);
  CHECK(m.peak_fill <= 1.0);
  CHECK(m.drivers.rejected_at_capacity > 0);
  CHECK(m.utilization >= 0.0);
  CHECK(m.utilization <= 1.0);
}

TEST_CASE("Little's law on the aggregate system") {
  const auto sc = curb(0.15, {0.0, 0.0, 1.0});
  const auto m = run_simulation(sc, 400000.0, 40000.0, 5);
  const double admitted = static_cast<double>(m.drivers.joined_blind - m.drivers.rejected_at_capacity);
  const double rate = admitted / m.window();
  CHECK(m.mean_in_system == doctest::Approx(rate * m.mean_sojourn).epsilon(0.05));
}

TEST_CASE("standard error shrinks with the horizon") {
  const auto sc = curb(0.2, {0.3, 0.2, 0.5});
  auto se = [&](double horizon) {
    std::vector<double> u;
    for (const auto& m : run_many({sc}, seeds(12), horizon, 0.1 * horizon, 1)) u.push_back(m.utilization);
    return mean_and_se(u).se;
  };
  // Four times the horizon should halve the error; accept a factor of two either way.
  const double ratio = se(5000.0) / se(20000.0);
  CHECK(ratio > 1.0);
  CHECK(ratio < 4.0);
}

TEST_CASE("configuration errors surface before simulating") {
  auto sc = curb(0.2, {0.0, 0.0, 1.0});
  sc.streets.clear();
  CHECK_THROWS_AS(run_simulation(sc, 100.0, 0.0, 1), ConfigError);
  sc = curb(0.2, {0.0, 0.0, 1.0});
  sc.sources = {9};
  CHECK_THROWS_AS(run_simulation(sc, 100.0, 0.0, 1), ConfigError);
  sc = curb(0.2, {0.0, 0.0, 1.0});
  CHECK_THROWS_AS(run_simulation(sc, 100.0, 100.0, 1), ConfigError);
  sc.service_rate = 0.0;
  CHECK_THROWS_AS(run_simulation(sc, 100.0, 0.0, 1), ConfigError);
}

TEST_CASE("occupancy rises with demand") {
  auto sc = NetworkScenario::complete(3, 10, 1.0);
  sc.sources = {0, 1, 2};
  sc.service_rate = 0.1;
  sc.capacity = 100;
  sc.strategy = {0.0, 0.0, 1.0};
  const auto sweep = occupancy_congestion_sweep(sc, 0.05, 2.5, 6, seeds(3), 4000.0, 400.0, 1);
  REQUIRE(sweep.size() == 6);
  CHECK(sweep.front().utilization < 0.05);
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    CHECK(sweep[i].utilization >= sweep[i - 1].utilization - 3.0 * sweep[i].utilization_se - 1e-3);
  }
  CHECK_THROWS_AS(occupancy_congestion_sweep(sc, 0.05, 2.5, 1, seeds(3), 100.0, 0.0, 1), ConfigError);
}

TEST_CASE("knee location") {
  std::vector<SweepPoint> sweep;
  const double util[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  const double wait[] = {1.0, 1.2, 2.0, 6.0, 30.0};
  for (int i = 0; i < 5; ++i) sweep.push_back({0.1 * (i + 1), util[i], 0.0, wait[i], 0.0, 0.0, 0.0});
  CHECK(knee_utilization(sweep) == 0.7);
  CHECK(knee_utilization(sweep, 50.0) < 0.0);
}

TEST_CASE("sample statistics") {
  const auto s = mean_and_se({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(mean_and_se({3.0}).se == 0.0);
}
