#include "parking/observable_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parking {

namespace {

// Absorbs representation error when the floor argument sits on an integer,
// so a price at the upper end of its interval keeps the inclusive boundary.
constexpr double kFloorSlack = 1e-9;

int floor_level(double x) {
  if (!(x > 0.0)) return 0;
  const double f = std::floor(x + kFloorSlack);
  if (f >= static_cast<double>(std::numeric_limits<int>::max())) {
    throw ParameterError("balking level overflows int; wait_cost is too small");
  }
  return static_cast<int>(f);
}

}  // namespace

double nominal_utility(int k, const QueueParams& q, const CostParams& costs) {
  return costs.reward - expected_wait_cost(k, q, costs);
}

double total_utility(int k, const QueueParams& q, const CostParams& costs) {
  return nominal_utility(k, q, costs) - costs.park_cost / q.mu;
}

int balking_level(const QueueParams& q, const CostParams& costs) {
  q.validate();
  costs.validate();
  return floor_level((costs.reward * q.mu * q.c - costs.park_cost * q.c) / costs.wait_cost);
}

Action equilibrium_strategy(int k, int n_b) { return k < n_b ? Action::join : Action::balk; }

std::vector<double> social_welfare_curve(const QueueParams& q, const CostParams& costs, int n_max) {
  q.validate();
  if (n_max < 1) throw ParameterError("n_max must be >= 1");

  std::vector<double> beta(static_cast<std::size_t>(n_max));
  for (int k = 0; k < n_max; ++k) beta[k] = total_utility(k, q, costs);

  std::vector<double> curve(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int cap = 1; cap <= n_max; ++cap) {
    // stationary_plain insists on n >= c; a smaller capacity just truncates
    // the chain earlier, which birth_death_stationary handles directly.
    std::vector<double> rates(static_cast<std::size_t>(cap), q.lambda);
    const auto dist = birth_death_stationary(rates, q.mu, q.c);
    double sum = 0.0;
    for (int k = 0; k < cap; ++k) sum += dist.probs[k] * beta[k];
    curve[cap] = q.lambda * sum;
  }
  return curve;
}

int socially_optimal_level(const QueueParams& q, const CostParams& costs) {
  const int n_b = balking_level(q, costs);
  if (n_b == 0) return 0;
  const auto curve = social_welfare_curve(q, costs, n_b);
  // max_element returns the first maximum, i.e. the smallest argmax.
  return static_cast<int>(std::max_element(curve.begin(), curve.end()) - curve.begin());
}

PriceInterval pricing_interval(int target_level, const QueueParams& q, const CostParams& costs) {
  q.validate();
  costs.validate();
  if (target_level < 1) throw ParameterError("target level must be >= 1");
  const double upper = q.mu * nominal_utility(target_level - 1, q, costs);
  if (upper <= 0.0) {
    throw InfeasibleTarget("no nonnegative parking price achieves balking level " +
                           std::to_string(target_level));
  }
  const double lower = std::max(0.0, q.mu * nominal_utility(target_level, q, costs));
  return {lower, upper};
}

WelfareOrdering welfare_ordering_check(int n_cl, int n_b, int n_so, const std::vector<double>& curve,
                                       double tol) {
  const int needed = std::max({n_cl, n_b, n_so});
  if (n_cl < 0 || n_b < 0 || n_so < 0 || needed >= static_cast<int>(curve.size())) {
    throw ParameterError("welfare curve does not cover the requested levels");
  }
  WelfareOrdering out;
  out.at_congestion_limit = curve[n_cl];
  out.at_user_level = curve[n_b];
  out.at_social_optimum = curve[n_so];
  out.cl_below_so = out.at_congestion_limit <= out.at_social_optimum + tol;
  out.b_below_cl = n_cl > n_b || out.at_user_level <= out.at_congestion_limit + tol;
  return out;
}

bool is_unimodal(const std::vector<double>& curve, double rel_tol) {
  double scale = 0.0;
  for (double v : curve) scale = std::max(scale, std::abs(v));
  const double tol = rel_tol * std::max(scale, 1.0);
  bool decreasing = false;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double diff = curve[i] - curve[i - 1];
    if (diff < -tol) decreasing = true;
    else if (diff > tol && decreasing) return false;
  }
  return true;
}

int offstreet_balking_level(const QueueParams& q, const CostParams& costs) {
  q.validate();
  costs.validate();
  if (!costs.offstreet_cost) throw ParameterError("offstreet_cost is required for the off-street game");
  return floor_level(q.c * (*costs.offstreet_cost - costs.park_cost) / costs.wait_cost);
}

double offstreet_utility(const QueueParams& q, const CostParams& costs) {
  if (!costs.offstreet_cost) throw ParameterError("offstreet_cost is required for the off-street game");
  return costs.reward - *costs.offstreet_cost / q.mu;
}

}  // namespace parking
