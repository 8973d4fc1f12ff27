#include "parking/netflow_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <numeric>
#include <queue>
#include <random>
#include <thread>
#include <unordered_map>

namespace parking {

int NetworkScenario::total_spots() const {
  int total = 0;
  for (const auto& b : blockfaces) total += b.spots;
  return total;
}

void NetworkScenario::validate() const {
  if (blockfaces.empty()) throw ConfigError("network.blockfaces must not be empty");
  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < blockfaces.size(); ++i) {
    if (blockfaces[i].spots < 1) throw ConfigError("network.blockfaces.spots must be >= 1");
    if (!index.emplace(blockfaces[i].id, i).second) {
      throw ConfigError("duplicate blockface id " + std::to_string(blockfaces[i].id));
    }
  }
  std::vector<std::vector<std::size_t>> adj(blockfaces.size());
  for (const auto& s : streets) {
    const auto from = index.find(s.from);
    const auto to = index.find(s.to);
    if (from == index.end() || to == index.end()) {
      throw ConfigError("network.streets references an unknown blockface");
    }
    if (!(std::isfinite(s.drive_time) && s.drive_time > 0.0)) {
      throw ConfigError("network.streets.drive_time must be > 0");
    }
    adj[from->second].push_back(to->second);
  }
  if (sources.empty()) throw ConfigError("network.sources must not be empty");
  for (int src : sources) {
    const auto it = index.find(src);
    if (it == index.end()) throw ConfigError("network.sources references an unknown blockface");
    std::vector<bool> seen(blockfaces.size(), false);
    std::vector<std::size_t> stack{it->second};
    seen[it->second] = true;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) {
        throw ConfigError("blockface " + std::to_string(blockfaces[i].id) +
                          " is unreachable from source " + std::to_string(src));
      }
    }
  }
  if (!(std::isfinite(arrival_rate) && arrival_rate >= 0.0)) {
    throw ConfigError("arrival_rate must be >= 0");
  }
  if (!(std::isfinite(service_rate) && service_rate > 0.0)) {
    throw ConfigError("service_rate must be > 0");
  }
  if (!(std::isfinite(entry_drive_time) && entry_drive_time >= 0.0)) {
    throw ConfigError("entry_drive_time must be >= 0");
  }
  if (balk_threshold < 0) throw ConfigError("balk_threshold must be >= 0");
  if (capacity < 1) throw ConfigError("capacity must be >= 1");
  try {
    strategy.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("strategy: ") + e.what());
  }
}

NetworkScenario NetworkScenario::complete(int count, int spots, double drive_time) {
  NetworkScenario s;
  for (int i = 0; i < count; ++i) s.blockfaces.push_back({i, spots});
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < count; ++j) {
      if (i != j) s.streets.push_back({i, j, drive_time});
    }
  }
  s.sources = {0};
  s.capacity = count * spots;
  return s;
}

namespace {

enum class EventType : std::uint8_t { arrival, reach, depart };

struct Event {
  double time;
  std::uint64_t seq;
  EventType type;
  std::size_t subject;  // driver index for reach/depart, unused for arrival

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    return seq > o.seq;
  }
};

struct Driver {
  double arrival_time = 0.0;
  double park_time = 0.0;
  std::size_t target = 0;
};

struct Edge {
  std::size_t to;
  double drive_time;
};

class Simulation {
 public:
  Simulation(const NetworkScenario& sc, double horizon, double warmup, std::uint64_t seed)
      : sc_(sc), horizon_(horizon), warmup_(warmup), rng_(seed) {
    std::unordered_map<int, std::size_t> index;
    for (std::size_t i = 0; i < sc.blockfaces.size(); ++i) index[sc.blockfaces[i].id] = i;
    adj_.resize(sc.blockfaces.size());
    for (const auto& s : sc.streets) adj_[index[s.from]].push_back({index[s.to], s.drive_time});
    for (int src : sc.sources) sources_.push_back(index[src]);
    spots_.reserve(sc.blockfaces.size());
    for (const auto& b : sc.blockfaces) spots_.push_back(b.spots);
    occupied_.assign(spots_.size(), 0);
    committed_.assign(spots_.size(), 0);
    total_spots_ = sc.total_spots();
    metrics_.horizon = horizon;
    metrics_.warmup = warmup;
    metrics_.seed = seed;
    metrics_.service_rate = sc.service_rate;
  }

  SimMetrics run() {
    if (sc_.arrival_rate > 0.0) schedule(next_interarrival(), EventType::arrival, 0);
    while (!events_.empty() && events_.top().time <= horizon_) {
      const Event ev = events_.top();
      events_.pop();
      advance_clock(ev.time);
      switch (ev.type) {
        case EventType::arrival: on_arrival(); break;
        case EventType::reach: on_reach(ev.subject); break;
        case EventType::depart: on_depart(ev.subject); break;
      }
    }
    advance_clock(horizon_);
    return finish();
  }

 private:
  bool in_window(double t) const { return t >= warmup_; }
  double now() const { return clock_; }

  void schedule(double at, EventType type, std::size_t subject) {
    events_.push(Event{at, seq_++, type, subject});
  }

  double next_interarrival() {
    return clock_ + std::exponential_distribution<double>(sc_.arrival_rate)(rng_);
  }

  std::size_t uniform_index(std::size_t size) {
    return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng_);
  }

  void advance_clock(double t) {
    const double lo = std::max(clock_, warmup_);
    if (t > lo) {
      occupied_area_ += (t - lo) * occupied_total_;
      population_area_ += (t - lo) * population_;
    }
    clock_ = t;
  }

  std::size_t least_loaded() {
    std::size_t best_load = static_cast<std::size_t>(-1);
    std::vector<std::size_t> ties;
    for (std::size_t b = 0; b < spots_.size(); ++b) {
      const std::size_t load = committed_[b] + occupied_[b];
      if (load < best_load) {
        best_load = load;
        ties.assign(1, b);
      } else if (load == best_load) {
        ties.push_back(b);
      }
    }
    return ties.size() == 1 ? ties[0] : ties[uniform_index(ties.size())];
  }

  void admit(std::size_t target) {
    const std::size_t id = drivers_.size();
    drivers_.push_back(Driver{now(), 0.0, target});
    ++population_;
    metrics_.peak_in_system =
        std::max(metrics_.peak_in_system, static_cast<std::int64_t>(population_));
    ++committed_[target];
    schedule(now() + sc_.entry_drive_time, EventType::reach, id);
  }

  void on_arrival() {
    schedule(next_interarrival(), EventType::arrival, 0);
    const bool counted = in_window(now());
    auto& c = metrics_.drivers;
    if (counted) ++c.arrived;

    const std::size_t source = sources_.size() == 1 ? sources_[0] : sources_[uniform_index(sources_.size())];
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    const auto& s = sc_.strategy;

    if (u < s.p_observe) {
      if (counted) ++c.observed;
      const std::size_t target = least_loaded();
      const std::size_t seen = sc_.observer_rule == ObserverRule::system
                                   ? population_
                                   : committed_[target] + occupied_[target];
      if (seen >= static_cast<std::size_t>(sc_.balk_threshold)) {
        if (counted) ++c.observed_balked;
        return;
      }
      if (population_ >= static_cast<std::size_t>(sc_.capacity)) {
        if (counted) ++c.rejected_at_capacity;
        return;
      }
      admit(target);
    } else if (u < s.p_observe + s.p_balk) {
      if (counted) ++c.balked;
    } else {
      if (counted) ++c.joined_blind;
      if (population_ >= static_cast<std::size_t>(sc_.capacity)) {
        if (counted) ++c.rejected_at_capacity;
        return;
      }
      const std::size_t target =
          sc_.blind_routing == BlindRouting::source ? source : uniform_index(spots_.size());
      admit(target);
    }
  }

  void on_reach(std::size_t id) {
    Driver& d = drivers_[id];
    const std::size_t b = d.target;
    --committed_[b];
    if (occupied_[b] < static_cast<std::size_t>(spots_[b])) {
      ++occupied_[b];
      ++occupied_total_;
      metrics_.peak_fill =
          std::max(metrics_.peak_fill, static_cast<double>(occupied_[b]) / spots_[b]);
      d.park_time = now();
      const double service = std::exponential_distribution<double>(sc_.service_rate)(rng_);
      if (in_window(now())) {
        ++metrics_.drivers.parked;
        metrics_.total_wait += now() - d.arrival_time;
        metrics_.total_service += service;
      }
      schedule(now() + service, EventType::depart, id);
      return;
    }
    // Full: circle to a uniformly random neighbor.
    const auto& out = adj_[b];
    if (out.empty()) {
      d.target = b;
      ++committed_[b];
      schedule(now() + std::max(sc_.entry_drive_time, 1e-9), EventType::reach, id);
      return;
    }
    const Edge& e = out.size() == 1 ? out[0] : out[uniform_index(out.size())];
    d.target = e.to;
    ++committed_[e.to];
    schedule(now() + e.drive_time, EventType::reach, id);
  }

  void on_depart(std::size_t id) {
    const Driver& d = drivers_[id];
    --occupied_[d.target];
    --occupied_total_;
    --population_;
    if (in_window(now())) {
      ++metrics_.departed;
      sojourn_sum_ += now() - d.arrival_time;
    }
  }

  SimMetrics finish() {
    const double window = horizon_ - warmup_;
    auto& m = metrics_;
    m.utilization = total_spots_ > 0 ? occupied_area_ / (window * total_spots_) : 0.0;
    m.mean_in_system = population_area_ / window;
    m.avg_wait = m.drivers.parked > 0 ? m.total_wait / static_cast<double>(m.drivers.parked) : 0.0;
    m.mean_sojourn = m.departed > 0 ? sojourn_sum_ / static_cast<double>(m.departed) : 0.0;
    m.welfare_rate = estimate_welfare(m, sc_.costs, sc_.outside_option);
    return m;
  }

  const NetworkScenario& sc_;
  double horizon_;
  double warmup_;
  std::mt19937_64 rng_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  double clock_ = 0.0;

  std::vector<std::vector<Edge>> adj_;
  std::vector<std::size_t> sources_;
  std::vector<int> spots_;
  std::vector<std::size_t> occupied_;
  std::vector<std::size_t> committed_;
  std::vector<Driver> drivers_;
  std::size_t occupied_total_ = 0;
  std::size_t population_ = 0;
  int total_spots_ = 0;

  double occupied_area_ = 0.0;
  double population_area_ = 0.0;
  double sojourn_sum_ = 0.0;
  SimMetrics metrics_;
};

}  // namespace

SimMetrics run_simulation(const NetworkScenario& scenario, double horizon, double warmup,
                          std::uint64_t seed) {
  scenario.validate();
  if (!(std::isfinite(horizon) && std::isfinite(warmup) && warmup >= 0.0 && horizon > warmup)) {
    throw ConfigError("simulation requires horizon > warmup >= 0");
  }
  return Simulation(scenario, horizon, warmup, seed).run();
}

double estimate_welfare(const SimMetrics& m, const CostParams& costs, OutsideOption outside_option) {
  const double window = m.window();
  if (!(window > 0.0)) return 0.0;
  double balk_payoff = 0.0;
  if (outside_option == OutsideOption::offstreet && costs.offstreet_cost && m.service_rate > 0.0) {
    balk_payoff = costs.reward - *costs.offstreet_cost / m.service_rate;
  }
  const double parked = static_cast<double>(m.drivers.parked);
  const double total = parked * costs.reward - costs.wait_cost * m.total_wait -
                       costs.park_cost * m.total_service -
                       costs.observe_cost * static_cast<double>(m.drivers.observed) +
                       balk_payoff * static_cast<double>(m.drivers.balked);
  return total / window;
}

MeanSe mean_and_se(const std::vector<double>& values) {
  MeanSe out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

std::vector<SimMetrics> run_many(const std::vector<NetworkScenario>& scenarios,
                                 const std::vector<std::uint64_t>& seeds, double horizon,
                                 double warmup, unsigned threads) {
  const std::size_t jobs = scenarios.size() * seeds.size();
  std::vector<SimMetrics> out(jobs);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));

  for (const auto& sc : scenarios) sc.validate();

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const auto& sc = scenarios[j / seeds.size()];
      out[j] = run_simulation(sc, horizon, warmup, seeds[j % seeds.size()]);
    }
  };
  if (threads <= 1) {
    worker();
    return out;
  }
  std::vector<std::future<void>> pool;
  for (unsigned t = 0; t < threads; ++t) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
  return out;
}

std::vector<SweepPoint> occupancy_congestion_sweep(const NetworkScenario& scenario_template,
                                                   double lambda_lo, double lambda_hi, int steps,
                                                   const std::vector<std::uint64_t>& seeds,
                                                   double horizon, double warmup,
                                                   unsigned threads) {
  if (steps < 2) throw ConfigError("sweep steps must be >= 2");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  if (!(lambda_lo > 0.0 && lambda_hi >= lambda_lo)) {
    throw ConfigError("sweep lambda range must satisfy 0 < lo <= hi");
  }
  std::vector<NetworkScenario> scenarios;
  std::vector<double> lambdas;
  for (int i = 0; i < steps; ++i) {
    const double lam = lambda_lo + (lambda_hi - lambda_lo) * i / (steps - 1);
    lambdas.push_back(lam);
    auto sc = scenario_template;
    sc.arrival_rate = lam;
    scenarios.push_back(std::move(sc));
  }
  const auto runs = run_many(scenarios, seeds, horizon, warmup, threads);

  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    std::vector<double> util, wait, welfare;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& m = runs[i * seeds.size() + s];
      util.push_back(m.utilization);
      wait.push_back(m.avg_wait);
      welfare.push_back(m.welfare_rate);
    }
    const auto u = mean_and_se(util), w = mean_and_se(wait), v = mean_and_se(welfare);
    out.push_back({lambdas[i], u.mean, u.se, w.mean, w.se, v.mean, v.se});
  }
  return out;
}

double knee_utilization(const std::vector<SweepPoint>& sweep, double factor) {
  if (sweep.empty()) return -1.0;
  const double baseline = sweep.front().avg_wait;
  for (const auto& p : sweep) {
    if (p.avg_wait > factor * baseline) return p.utilization;
  }
  return -1.0;
}

}  // namespace parking
