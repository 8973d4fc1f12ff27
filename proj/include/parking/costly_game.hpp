#pragma once

// Costly-observation queue game. Each arriving driver observes the queue for
// a fee, balks without looking, or joins blind, according to a symmetric
// mixed strategy on the 2-simplex.

#include <algorithm>
#include <array>
#include <string>

#include "parking/observable_game.hpp"
#include "parking/queue_core.hpp"

namespace parking {

struct Strategy {
  double p_observe = 0.0;
  double p_balk = 0.0;
  double p_join = 0.0;

  static Strategy uniform() { return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; }

  /// Throws ParameterError unless every component is in [0,1] and they sum to 1.
  void validate(double tol = 1e-9) const;
  std::array<double, 3> as_array() const { return {p_observe, p_balk, p_join}; }
};

/// Largest absolute componentwise difference.
double max_abs_diff(const Strategy& a, const Strategy& b);

enum class OutsideOption { zero, offstreet };

struct GameSpec {
  QueueParams queue;
  CostParams costs;
  OutsideOption outside_option = OutsideOption::zero;
  int n_b = 0;  // balking level of the free-observation game

  /// Validates the inputs and derives n_b. Off-street requires C_off.
  static GameSpec make(const QueueParams& q, const CostParams& costs, OutsideOption option);

  /// State from which informed drivers balk. Equals n_b unless the system
  /// capacity binds first.
  int observe_threshold() const { return std::min(n_b, queue.n); }

  double rho() const { return queue.traffic_intensity(); }
  double xi(const Strategy& s) const { return (1.0 - s.p_balk) * rho(); }
  double eta(const Strategy& s) const { return s.p_join * rho(); }
};

struct Utilities {
  double observe = 0.0;
  double balk = 0.0;
  double join = 0.0;

  double max() const { return std::max({observe, balk, join}); }
};

/// Stationary distribution when drivers follow `s`: arrivals at rate
/// (1 - P_b) lambda below the observe threshold and P_j lambda at or above it.
StationaryDistribution stationary_costly(const GameSpec& spec, const Strategy& s);

double utility_observe(const GameSpec& spec, const Strategy& s);
double utility_join(const GameSpec& spec, const Strategy& s);
double utility_balk(const GameSpec& spec);

/// All three utilities from a single distribution solve.
Utilities utilities(const GameSpec& spec, const Strategy& s);

/// Branch structure of the damped best-response iteration, applied to
/// precomputed utilities.
Strategy best_response(const Utilities& u, const Strategy& s, double eps);
Strategy best_response(const GameSpec& spec, const Strategy& s, double eps);

/// lambda (P_o U_o + P_b U_b + P_j U_j), utility per minute.
double social_welfare(const GameSpec& spec, const Strategy& s);

/// Regret of `s` against itself: max_i U_i - sum_i P_i U_i. Zero exactly at a
/// symmetric equilibrium.
double equilibrium_residual(const Utilities& u, const Strategy& s);

enum class SolutionKind { nash, social_optimum };

std::string to_string(SolutionKind kind);

struct EquilibriumResult {
  Strategy strategy;
  Utilities utilities;
  SolutionKind kind = SolutionKind::nash;
  double welfare = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct NashSettings {
  double eps = 1e-4;
  double delta = 1e-6;
  double gamma = 0.9;  // weight on the previous iterate
  Strategy start = Strategy::uniform();
  int max_iters = 100000;

  void validate() const;
};

/// Damped best-response dynamics. When consecutive strict best responses
/// point in opposing directions the step 1 - gamma is halved, so iterates
/// settle onto indifference surfaces instead of cycling around them. Updates
/// toward a tie branch always use the base weight gamma. The final iterate is
/// snapped onto a nearby certified edge or interior equilibrium, then mass on
/// eps-tied actions is moved to the better one (exact ties favour observing).
/// Non-convergence is reported through `converged`, never thrown.
EquilibriumResult nash_equilibrium(const GameSpec& spec, const NashSettings& settings = {});

struct SocialOptimumSettings {
  int grid_resolution = 200;
  double min_step = 1e-7;
};

/// Barycentric grid scan followed by compass descent along the six simplex
/// edge directions, halving the step until it drops below `min_step`.
EquilibriumResult socially_optimal_strategy(const GameSpec& spec,
                                            const SocialOptimumSettings& settings = {});

}  // namespace parking
