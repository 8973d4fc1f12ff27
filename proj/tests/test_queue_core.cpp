#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracle.hpp"
#include "parking/queue_core.hpp"

using namespace parking;

namespace {

double max_abs_gap(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("two-state symmetric chain") {
  const auto d = stationary_plain({1.0, 1.0, 1, 1});
  REQUIRE(d.size() == 2);
  CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(d[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("unit intensity single server gives a flat law") {
  const auto d = stationary_plain({1.0, 1.0, 1, 2});
  for (double p : d.probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("matches generator solve at curbside scale") {
  const QueueParams q{0.25, 1.0 / 120.0, 30, 100};
  const auto d = stationary_plain(q);
  CHECK(max_abs_gap(d.probs, oracle::plain(q.lambda, q.mu, q.c, q.n)) < 1e-9);
}

TEST_CASE("normalization and detailed balance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 1 + static_cast<int>(unit(rng) * 40);
    const QueueParams q{0.01 + unit(rng), 0.005 + 0.1 * unit(rng), c,
                        c + static_cast<int>(unit(rng) * 150)};
    const auto d = stationary_plain(q);
    const double total = std::accumulate(d.probs.begin(), d.probs.end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (int k = 0; k < q.n; ++k) {
      const double lhs = q.lambda * d[k];
      const double rhs = std::min(k + 1, q.c) * q.mu * d[k + 1];
      if (lhs > 1e-300) CHECK(std::abs(lhs - rhs) <= 1e-10 * lhs);
      CHECK(d[k] >= 0.0);
    }
  }
}

TEST_CASE("partial normalizers accumulate the weights") {
  const QueueParams q{0.2, 1.0 / 120.0, 30, 100};
  const auto d = stationary_plain(q);
  const double total = d.cum_norm.back();
  double running = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    running += d[k];
    CHECK(d.cum_norm[k] / total == doctest::Approx(running).epsilon(1e-12));
  }
}

TEST_CASE("large capacity stays finite") {
  for (double lambda : {0.1, 0.25, 0.5}) {
    const auto d = stationary_plain({lambda, 1.0 / 120.0, 30, 10000});
    double total = 0.0;
    for (double p : d.probs) {
      REQUIRE(std::isfinite(p));
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("invalid parameters name the field") {
  auto message = [](const QueueParams& q) {
    try {
      stationary_plain(q);
    } catch (const ParameterError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message({0.0, 1.0, 1, 1}).find("arrival_rate") != std::string::npos);
  CHECK(message({1.0, -1.0, 1, 1}).find("service_rate") != std::string::npos);
  CHECK_THROWS_AS(stationary_plain({1.0, 1.0, 0, 1}), ParameterError);
  CHECK_THROWS_AS(stationary_plain({1.0, 1.0, 3, 2}), ParameterError);
}

TEST_CASE("linear waiting cost") {
  const QueueParams q{0.2, 1.0 / 120.0, 30, 100};
  const CostParams costs{75.0, 1.5, 0.05, 0.0, std::nullopt};
  CHECK(expected_wait_cost(0, q, costs) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(expected_wait_cost(11, q, costs) == doctest::Approx(72.0).epsilon(1e-12));
}

TEST_CASE("queueing delay density") {
  const QueueParams q{0.2, 1.0 / 120.0, 30, 100};
  CHECK(queue_time_density(31, q, 4.0) == doctest::Approx(0.0625 * 4.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(queue_time_density(29, q, 1.0), ParameterError);

  for (int k : {30, 31, 35, 50}) {
    const int shape = k - q.c + 1;
    const double rate = q.c * q.mu;
    const double upper = (shape + 40.0 * std::sqrt(shape)) / rate + 400.0;
    auto g = [&](double t) { return queue_time_density(k, q, t); };
    CHECK(oracle::simpson(g, 0.0, upper, 20000) == doctest::Approx(1.0).epsilon(1e-8));
    auto tg = [&](double t) { return t * queue_time_density(k, q, t); };
    CHECK(oracle::simpson(tg, 0.0, upper, 20000) == doctest::Approx(shape / rate).epsilon(1e-7));
  }
}
