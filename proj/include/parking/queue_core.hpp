#pragma once

// Stationary analysis of the M/M/c/n parking queue.
//
// All rates are per minute. A queue state k counts every driver in the
// system, parked or circling, so k ranges over 0..n.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parking {

/// Raised when a parameter lies outside its mathematical domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct QueueParams {
  double lambda = 0.0;  // arrival rate, drivers/min
  double mu = 0.0;      // service rate per spot, 1/min
  int c = 1;            // parking spots
  int n = 1;            // system capacity, parked + circling

  /// Offered load per spot, lambda / (c mu).
  double traffic_intensity() const { return lambda / (c * mu); }

  /// Throws ParameterError naming the first offending field.
  void validate() const;
};

struct CostParams {
  double reward = 0.0;       // R
  double wait_cost = 0.0;    // C_w, per minute in the system
  double park_cost = 0.0;    // C_p (on-street price), per minute parked
  double observe_cost = 0.0; // C_o, one-off; negative means observation is subsidized
  std::optional<double> offstreet_cost;  // C_off, per minute parked off-street

  void validate() const;

  /// Copy with a different on-street price.
  CostParams with_park_cost(double price) const {
    CostParams out = *this;
    out.park_cost = price;
    return out;
  }
};

/// Unnormalized birth-death weights plus the normalized distribution.
///
/// `cum_norm[j]` holds D_j = sum_{k<=j} d_k. The weights are stored after
/// division by max_k d_k so that large systems stay finite; ratios between
/// entries, and therefore every identity involving them, are unaffected.
struct StationaryDistribution {
  enum class Variant { plain, costly };

  std::vector<double> probs;
  std::vector<double> cum_norm;
  Variant variant = Variant::plain;
  int balk_threshold = 0;  // only meaningful for the costly variant

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t k) const { return probs[k]; }
};

/// Builds a distribution over states 0..arrival_rates.size() from a birth-death
/// chain with state-dependent arrival rates and min(k+1, c)·mu departures.
/// Computed in log space; zero arrival rates are allowed and cut the chain.
StationaryDistribution birth_death_stationary(const std::vector<double>& arrival_rates, double mu,
                                              int c);

/// p_0..p_n for the plain M/M/c/n queue.
StationaryDistribution stationary_plain(const QueueParams& q);

/// w_k = C_w (k+1) / (mu c), the linear waiting cost charged to a driver who
/// finds k others in the system. Applied uniformly for every k.
double expected_wait_cost(int k, const QueueParams& q, const CostParams& costs);

/// Gamma density of the queueing delay seen by a driver arriving in state k >= c.
double queue_time_density(int k, const QueueParams& q, double t);

}  // namespace parking
