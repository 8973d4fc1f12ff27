#pragma once

// Discrete-event simulator of a queue-flow parking network. Blockfaces are
// multi-server queues; streets are directed edges with fixed drive times.
// Drivers who find their blockface full circle to a uniformly random
// neighbor. The costly-observation strategy only shapes the arrival stream.

#include <cstdint>
#include <string>
#include <vector>

#include "parking/costly_game.hpp"

namespace parking {

/// Raised for malformed scenarios, before any event is processed.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Blockface {
  int id = 0;
  int spots = 1;
};

struct Street {
  int from = 0;
  int to = 0;
  double drive_time = 1.0;  // minutes
};

/// Where drivers who join without observing are sent.
enum class BlindRouting {
  uniform,  // any blockface, uniformly at random
  source,   // the blockface at which they entered the network
};

/// What an observer compares against the balk threshold.
enum class ObserverRule {
  system,     // total drivers present in the network
  blockface,  // drivers committed to the least-loaded blockface
};

struct NetworkScenario {
  std::vector<Blockface> blockfaces;
  std::vector<Street> streets;
  std::vector<int> sources;  // blockface ids receiving exogenous arrivals
  double arrival_rate = 0.0;  // total, drivers/min, split evenly across sources
  double service_rate = 0.0;  // per spot, 1/min
  Strategy strategy{0.0, 0.0, 1.0};
  int balk_threshold = 0;  // n_b
  int capacity = 0;        // n, maximum drivers present
  double entry_drive_time = 1.0;  // from the network edge to the first blockface
  BlindRouting blind_routing = BlindRouting::uniform;
  ObserverRule observer_rule = ObserverRule::blockface;

  // Economic constants used only to report realized welfare.
  CostParams costs{1.0, 1.0, 0.0, 0.0, std::nullopt};
  OutsideOption outside_option = OutsideOption::zero;

  int total_spots() const;

  /// Throws ConfigError on bad ids, nonpositive rates or spots, or when a
  /// blockface cannot be reached from some source.
  void validate() const;

  /// `count` blockfaces of `spots` each, joined pairwise by two-way streets.
  static NetworkScenario complete(int count, int spots, double drive_time);
};

struct DriverCounts {
  std::int64_t arrived = 0;
  std::int64_t balked = 0;
  std::int64_t joined_blind = 0;
  std::int64_t observed = 0;
  std::int64_t observed_balked = 0;  // subset of observed
  std::int64_t rejected_at_capacity = 0;  // subset of joined_blind + observed
  std::int64_t parked = 0;
};

/// Statistics over the window [warmup, horizon]. Arrival dispositions count
/// drivers arriving in the window; parking statistics count drivers who park
/// in it.
struct SimMetrics {
  double avg_wait = 0.0;     // minutes from arrival to parking
  double utilization = 0.0;  // time-averaged occupied spots / total spots
  double welfare_rate = 0.0; // realized utility per minute
  DriverCounts drivers;
  double horizon = 0.0;
  double warmup = 0.0;
  std::uint64_t seed = 0;

  double total_wait = 0.0;     // summed over parked drivers
  double total_service = 0.0;  // summed parking durations of parked drivers
  double mean_in_system = 0.0; // time-averaged drivers present
  double mean_sojourn = 0.0;   // arrival to departure, over drivers departing in the window
  std::int64_t departed = 0;
  double service_rate = 0.0;

  // Over the whole run, warmup included.
  std::int64_t peak_in_system = 0;
  double peak_fill = 0.0;  // largest occupied / spots seen at any blockface

  double window() const { return horizon - warmup; }
};

/// Runs one seeded simulation. Identical inputs give bit-identical metrics.
SimMetrics run_simulation(const NetworkScenario& scenario, double horizon, double warmup,
                          std::uint64_t seed);

/// (sum over parked drivers of R - C_w wait - C_p service, minus C_o per
/// observer, plus U_b per balker) divided by the measurement window.
double estimate_welfare(const SimMetrics& metrics, const CostParams& costs,
                        OutsideOption outside_option);

struct SweepPoint {
  double lambda = 0.0;
  double utilization = 0.0;
  double utilization_se = 0.0;
  double avg_wait = 0.0;
  double avg_wait_se = 0.0;
  double welfare_rate = 0.0;
  double welfare_rate_se = 0.0;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean and standard error; se is zero for fewer than two values.
MeanSe mean_and_se(const std::vector<double>& values);

/// Runs every (seed, scenario) pair, in parallel when `threads` > 1; results
/// come back in input order.
std::vector<SimMetrics> run_many(const std::vector<NetworkScenario>& scenarios,
                                 const std::vector<std::uint64_t>& seeds, double horizon,
                                 double warmup, unsigned threads = 0);

/// One simulation per (lambda, seed) with lambda evenly spaced over
/// [lambda_lo, lambda_hi], aggregated per lambda.
std::vector<SweepPoint> occupancy_congestion_sweep(const NetworkScenario& scenario_template,
                                                   double lambda_lo, double lambda_hi, int steps,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   double horizon, double warmup,
                                                   unsigned threads = 0);

/// Utilization at the first sweep point whose mean wait exceeds `factor`
/// times the wait at the lowest arrival rate; negative if none does.
double knee_utilization(const std::vector<SweepPoint>& sweep, double factor = 5.0);

}  // namespace parking
