#pragma once

// Free-observation queue game: drivers see the queue state and join only
// while the total expected utility of joining is nonnegative.

#include <vector>

#include "parking/queue_core.hpp"

namespace parking {

/// Raised when no nonnegative price can induce the requested balking level.
class InfeasibleTarget : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Action { join, balk };

struct BalkingLevels {
  int n_b = 0;
  int n_so = 0;
  int n_cl = -1;  // negative when not supplied
};

/// Half-open price interval (lower, upper] in utility per minute.
struct PriceInterval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double price) const { return price > lower && price <= upper; }
  double midpoint() const { return 0.5 * (lower + upper); }
};

/// alpha_k = R - w_k.
double nominal_utility(int k, const QueueParams& q, const CostParams& costs);

/// beta_k = alpha_k - C_p / mu.
double total_utility(int k, const QueueParams& q, const CostParams& costs);

/// floor((R mu c - C_p c) / C_w), or 0 when parking is never worthwhile.
int balking_level(const QueueParams& q, const CostParams& costs);

/// Threshold rule: join iff fewer than n_b drivers are present.
Action equilibrium_strategy(int k, int n_b);

/// U_sw(n) = lambda * sum_{k<n} p_k(n) beta_k for n = 0..n_max, with p_k(n)
/// the plain stationary distribution at capacity n.
std::vector<double> social_welfare_curve(const QueueParams& q, const CostParams& costs, int n_max);

/// Smallest argmax of U_sw over 0..n_b.
int socially_optimal_level(const QueueParams& q, const CostParams& costs);

/// Price interval (mu alpha_t, mu alpha_{t-1}] inducing balking level t.
/// The lower end is clamped at zero so that every price in the result is
/// nonnegative.
PriceInterval pricing_interval(int target_level, const QueueParams& q, const CostParams& costs);

struct WelfareOrdering {
  double at_congestion_limit = 0.0;  // U_sw(n_cl)
  double at_user_level = 0.0;        // U_sw(n_b)
  double at_social_optimum = 0.0;    // U_sw(n_so)
  bool cl_below_so = true;           // U_sw(n_cl) <= U_sw(n_so)
  bool b_below_cl = true;            // U_sw(n_b) <= U_sw(n_cl), vacuous when n_cl > n_b
  bool holds() const { return cl_below_so && b_below_cl; }
};

/// Checks the welfare ordering between the congestion-limited, user-selected
/// and socially optimal levels on a precomputed curve. `tol` absorbs rounding.
WelfareOrdering welfare_ordering_check(int n_cl, int n_b, int n_so, const std::vector<double>& curve,
                                       double tol = 1e-9);

/// True when the curve has no interior local minimum: once it strictly
/// decreases it never strictly increases again. Differences within
/// `rel_tol * max|U|` count as flat.
bool is_unimodal(const std::vector<double>& curve, double rel_tol = 1e-10);

/// Off-street balking level floor(c (C_off - C_on) / C_w); zero when the
/// garage is cheaper than the curb.
int offstreet_balking_level(const QueueParams& q, const CostParams& costs);

/// U_off = R - C_off / mu.
double offstreet_utility(const QueueParams& q, const CostParams& costs);

}  // namespace parking
