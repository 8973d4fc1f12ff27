#include "parking/queue_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parking {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void QueueParams::validate() const {
  if (!finite_positive(lambda)) throw ParameterError("arrival_rate must be finite and > 0");
  if (!finite_positive(mu)) throw ParameterError("service_rate must be finite and > 0");
  if (c < 1) throw ParameterError("spots must be >= 1");
  if (n < c) throw ParameterError("capacity must be >= spots");
}

void CostParams::validate() const {
  if (!finite_positive(reward)) throw ParameterError("reward must be finite and > 0");
  if (!finite_positive(wait_cost)) throw ParameterError("wait_cost must be finite and > 0");
  if (!std::isfinite(park_cost) || park_cost < 0.0)
    throw ParameterError("park_cost must be finite and >= 0");
  if (!std::isfinite(observe_cost)) throw ParameterError("observe_cost must be finite");
  if (offstreet_cost && (!std::isfinite(*offstreet_cost) || *offstreet_cost < 0.0))
    throw ParameterError("offstreet_cost must be finite and >= 0");
}

StationaryDistribution birth_death_stationary(const std::vector<double>& arrival_rates, double mu,
                                              int c) {
  const std::size_t states = arrival_rates.size() + 1;
  std::vector<double> log_weight(states);
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();

  log_weight[0] = 0.0;
  for (std::size_t k = 0; k + 1 < states; ++k) {
    const double birth = arrival_rates[k];
    const double death = static_cast<double>(std::min<std::size_t>(k + 1, c)) * mu;
    log_weight[k + 1] = birth > 0.0 ? log_weight[k] + std::log(birth / death) : neg_inf;
  }

  const double peak = *std::max_element(log_weight.begin(), log_weight.end());
  StationaryDistribution out;
  out.probs.resize(states);
  out.cum_norm.resize(states);
  double running = 0.0;
  for (std::size_t k = 0; k < states; ++k) {
    const double w = std::exp(log_weight[k] - peak);
    out.probs[k] = w;
    running += w;
    out.cum_norm[k] = running;
  }
  for (double& p : out.probs) p /= running;
  return out;
}

StationaryDistribution stationary_plain(const QueueParams& q) {
  q.validate();
  std::vector<double> rates(static_cast<std::size_t>(q.n), q.lambda);
  return birth_death_stationary(rates, q.mu, q.c);
}

double expected_wait_cost(int k, const QueueParams& q, const CostParams& costs) {
  if (k < 0) throw ParameterError("queue state must be >= 0");
  return costs.wait_cost * (k + 1) / (q.mu * q.c);
}

double queue_time_density(int k, const QueueParams& q, double t) {
  if (k < q.c) throw ParameterError("queueing delay density is defined only for k >= c");
  if (t < 0.0) throw ParameterError("time must be >= 0");
  const double rate = q.c * q.mu;
  const int shape = k - q.c + 1;
  if (t == 0.0) return shape == 1 ? rate : 0.0;
  // log of rate^shape t^(shape-1) e^(-rate t) / (shape-1)!
  const double log_density =
      shape * std::log(rate) + (shape - 1) * std::log(t) - rate * t - std::lgamma(shape);
  return std::exp(log_density);
}

}  // namespace parking
