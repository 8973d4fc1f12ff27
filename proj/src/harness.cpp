#include "parking/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>

namespace parking {

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

namespace {

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& header) { out_ << header << '\n'; }

  CsvWriter& field(const std::string& text) {
    if (!first_) out_ << ',';
    out_ << text;
    first_ = false;
    return *this;
  }
  CsvWriter& field(double value) { return field(format_number(value)); }
  CsvWriter& field(std::int64_t value) { return field(std::to_string(value)); }
  CsvWriter& field(int value) { return field(std::to_string(value)); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

const char* kAnalyzeHeader = "scenario_id,quantity,index,value";
const char* kEquilibriumHeader =
    "scenario_id,kind,P_o,P_b,P_j,U_o,U_b,U_j,welfare,residual,converged";
const char* kSimulateHeader =
    "scenario_id,kind,seed,P_o,P_b,P_j,utilization,avg_wait,welfare_rate,arrived,balked,"
    "joined_blind,observed,observed_balked,rejected_at_capacity,parked";
const char* kSweepHeader = "scenario_id,parameter,sweep_value,kind,metric,value,stderr";

void analyze_row(CsvWriter& csv, const std::string& id, const std::string& quantity,
                 const std::string& index, double value) {
  csv.field(id).field(quantity).field(index).field(value);
  csv.end_row();
}

void price_rows(CsvWriter& csv, std::ostringstream& report, const std::string& id,
                const std::string& label, int target, const ScenarioConfig& cfg) {
  if (target < 1) {
    report << label << " level " << target << ": no price interval (level below 1)\n";
    return;
  }
  try {
    const auto p = pricing_interval(target, cfg.queue, cfg.costs);
    analyze_row(csv, id, "price_" + label + "_lower", "", p.lower);
    analyze_row(csv, id, "price_" + label + "_upper", "", p.upper);
    report << label << " level " << target << ": price in (" << format_number(p.lower) << ", "
           << format_number(p.upper) << "]\n";
  } catch (const InfeasibleTarget& e) {
    report << label << " level " << target << ": " << e.what() << '\n';
  }
}

}  // namespace

CommandOutput cmd_analyze(const ScenarioConfig& cfg) {
  cfg.queue.validate();
  cfg.costs.validate();
  const std::string id = scenario_id(cfg);
  CsvWriter csv(kAnalyzeHeader);
  std::ostringstream report;

  const int n_b = balking_level(cfg.queue, cfg.costs);
  const auto curve = social_welfare_curve(cfg.queue, cfg.costs, n_b);
  const int n_so =
      static_cast<int>(std::max_element(curve.begin(), curve.end()) - curve.begin());

  analyze_row(csv, id, "balking_level", "", n_b);
  analyze_row(csv, id, "social_level", "", n_so);
  report << "n_b = " << n_b << ", n_so = " << n_so << '\n';
  if (cfg.costs.offstreet_cost) {
    const int n_off = offstreet_balking_level(cfg.queue, cfg.costs);
    analyze_row(csv, id, "offstreet_level", "", n_off);
    analyze_row(csv, id, "offstreet_utility", "", offstreet_utility(cfg.queue, cfg.costs));
    report << "n_off = " << n_off << '\n';
  }
  price_rows(csv, report, id, "social", n_so, cfg);
  if (cfg.congestion_limit) {
    const int n_cl = *cfg.congestion_limit;
    analyze_row(csv, id, "congestion_level", "", n_cl);
    price_rows(csv, report, id, "congestion", n_cl, cfg);
    if (n_cl <= n_b) {
      const auto order = welfare_ordering_check(n_cl, n_b, n_so, curve);
      analyze_row(csv, id, "welfare_ordering_holds", "", order.holds() ? 1.0 : 0.0);
      report << "welfare ordering " << (order.holds() ? "holds" : "violated") << '\n';
    }
  }
  analyze_row(csv, id, "welfare_unimodal", "", is_unimodal(curve) ? 1.0 : 0.0);
  for (std::size_t n = 0; n < curve.size(); ++n) {
    analyze_row(csv, id, "welfare_curve", std::to_string(n), curve[n]);
  }
  return {csv.str(), report.str()};
}

EquilibriumResult solve(const ScenarioConfig& cfg, SolutionKind kind) {
  const auto spec = cfg.game_spec();
  return kind == SolutionKind::nash ? nash_equilibrium(spec, cfg.nash)
                                    : socially_optimal_strategy(spec, cfg.social);
}

CommandOutput cmd_equilibrium(const ScenarioConfig& cfg, SolutionKind kind) {
  const auto r = solve(cfg, kind);
  CsvWriter csv(kEquilibriumHeader);
  csv.field(scenario_id(cfg))
      .field(to_string(kind))
      .field(r.strategy.p_observe)
      .field(r.strategy.p_balk)
      .field(r.strategy.p_join)
      .field(r.utilities.observe)
      .field(r.utilities.balk)
      .field(r.utilities.join)
      .field(r.welfare)
      .field(r.residual)
      .field(std::string(r.converged ? "true" : "false"));
  csv.end_row();

  std::ostringstream report;
  report << to_string(kind) << ": (" << format_number(r.strategy.p_observe) << ", "
         << format_number(r.strategy.p_balk) << ", " << format_number(r.strategy.p_join)
         << "), welfare " << format_number(r.welfare) << ", residual " << format_number(r.residual)
         << ", iterations " << r.iterations << (r.converged ? "" : ", NOT converged") << '\n';
  return {csv.str(), report.str()};
}

namespace {

struct Prepared {
  Strategy strategy;
  NetworkScenario scenario;
};

// Arrivals-free configs are simulated without solving a game they cannot pose.
Prepared prepare(const ScenarioConfig& cfg, SolutionKind kind, std::ostringstream& report) {
  Prepared p;
  int n_b = 0;
  if (cfg.queue.lambda > 0.0) {
    const auto r = solve(cfg, kind);
    p.strategy = r.strategy;
    n_b = cfg.game_spec().n_b;
    if (!r.converged) report << "warning: " << to_string(kind) << " solve did not converge\n";
  } else {
    p.strategy = Strategy{0.0, 0.0, 1.0};
    n_b = balking_level(QueueParams{1.0, cfg.queue.mu, cfg.queue.c, cfg.queue.n}, cfg.costs);
  }
  p.scenario = cfg.network_scenario(p.strategy, n_b);
  return p;
}

void count_fields(CsvWriter& csv, const DriverCounts& d) {
  csv.field(d.arrived)
      .field(d.balked)
      .field(d.joined_blind)
      .field(d.observed)
      .field(d.observed_balked)
      .field(d.rejected_at_capacity)
      .field(d.parked);
}

std::vector<double> column(const std::vector<SimMetrics>& runs, double (*get)(const SimMetrics&)) {
  std::vector<double> out;
  for (const auto& m : runs) out.push_back(get(m));
  return out;
}

double get_util(const SimMetrics& m) { return m.utilization; }
double get_wait(const SimMetrics& m) { return m.avg_wait; }
double get_welfare(const SimMetrics& m) { return m.welfare_rate; }

}  // namespace

CommandOutput cmd_simulate(const ScenarioConfig& cfg, SolutionKind kind) {
  std::ostringstream report;
  const auto prep = prepare(cfg, kind, report);
  const auto& sim = cfg.simulation;
  const auto runs = run_many({prep.scenario}, sim.seeds, sim.horizon, sim.warmup, sim.threads);

  const std::string id = scenario_id(cfg);
  const std::string kind_name = to_string(kind);
  const auto& s = prep.strategy;
  CsvWriter csv(kSimulateHeader);
  auto lead = [&](const std::string& seed) {
    csv.field(id).field(kind_name).field(seed).field(s.p_observe).field(s.p_balk).field(s.p_join);
  };
  for (const auto& m : runs) {
    lead(std::to_string(m.seed));
    csv.field(m.utilization).field(m.avg_wait).field(m.welfare_rate);
    count_fields(csv, m.drivers);
    csv.end_row();
  }

  const auto u = mean_and_se(column(runs, get_util));
  const auto w = mean_and_se(column(runs, get_wait));
  const auto f = mean_and_se(column(runs, get_welfare));
  using Field = std::int64_t DriverCounts::*;
  const Field counts[] = {&DriverCounts::arrived,         &DriverCounts::balked,
                          &DriverCounts::joined_blind,    &DriverCounts::observed,
                          &DriverCounts::observed_balked, &DriverCounts::rejected_at_capacity,
                          &DriverCounts::parked};
  std::vector<MeanSe> count_stats;
  for (auto field : counts) {
    std::vector<double> v;
    for (const auto& m : runs) v.push_back(static_cast<double>(m.drivers.*field));
    count_stats.push_back(mean_and_se(v));
  }
  lead("mean");
  csv.field(u.mean).field(w.mean).field(f.mean);
  for (const auto& c : count_stats) csv.field(c.mean);
  csv.end_row();
  lead("stderr");
  csv.field(u.se).field(w.se).field(f.se);
  for (const auto& c : count_stats) csv.field(c.se);
  csv.end_row();

  report << kind_name << " strategy (" << format_number(s.p_observe) << ", "
         << format_number(s.p_balk) << ", " << format_number(s.p_join) << "), " << runs.size()
         << " seeds: utilization " << format_number(u.mean) << " +- " << format_number(u.se)
         << ", avg_wait " << format_number(w.mean) << " +- " << format_number(w.se) << '\n';
  return {csv.str(), report.str()};
}

CommandOutput cmd_sweep(const ScenarioConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("sweep: section required by the sweep command");
  const auto& sw = *cfg.sweep;
  const auto& sim = cfg.simulation;
  const auto values = sw.values();
  const std::string id = scenario_id(cfg);
  std::ostringstream report;

  struct Point {
    double value;
    std::string kind;
    std::optional<EquilibriumResult> analytic;
  };
  std::vector<Point> points;
  std::vector<NetworkScenario> scenarios;

  for (double v : values) {
    const auto point_cfg = cfg.with_parameter(sw.parameter, v);
    if (sw.mode == SweepMode::flow) {
      const int n_b = balking_level(
          QueueParams{1.0, point_cfg.queue.mu, point_cfg.queue.c, point_cfg.queue.n},
          point_cfg.costs);
      points.push_back({v, "fixed", std::nullopt});
      scenarios.push_back(point_cfg.network_scenario(*sim.strategy, n_b));
      continue;
    }
    const auto spec = point_cfg.game_spec();
    for (auto kind : {SolutionKind::nash, SolutionKind::social_optimum}) {
      auto r = solve(point_cfg, kind);
      if (!r.converged) {
        report << "warning: " << to_string(kind) << " did not converge at " << sw.parameter
               << " = " << format_number(v) << '\n';
      }
      if (sw.simulate) scenarios.push_back(point_cfg.network_scenario(r.strategy, spec.n_b));
      points.push_back({v, to_string(kind), std::move(r)});
    }
  }

  std::vector<SimMetrics> runs;
  if (sw.simulate) runs = run_many(scenarios, sim.seeds, sim.horizon, sim.warmup, sim.threads);

  CsvWriter csv(kSweepHeader);
  auto row = [&](const Point& p, const std::string& metric, double value, double se) {
    csv.field(id).field(sw.parameter).field(p.value).field(p.kind).field(metric).field(value).field(
        se);
    csv.end_row();
  };
  std::vector<SweepPoint> flow_curve;
  const std::size_t per = sim.seeds.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.analytic) {
      const auto& r = *p.analytic;
      row(p, "P_o", r.strategy.p_observe, 0.0);
      row(p, "P_b", r.strategy.p_balk, 0.0);
      row(p, "P_j", r.strategy.p_join, 0.0);
      row(p, "U_o", r.utilities.observe, 0.0);
      row(p, "U_b", r.utilities.balk, 0.0);
      row(p, "U_j", r.utilities.join, 0.0);
      row(p, "welfare", r.welfare, 0.0);
      row(p, "residual", r.residual, 0.0);
      row(p, "converged", r.converged ? 1.0 : 0.0, 0.0);
    }
    if (sw.simulate) {
      const std::vector<SimMetrics> slice(runs.begin() + static_cast<std::ptrdiff_t>(i * per),
                                          runs.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
      const auto u = mean_and_se(column(slice, get_util));
      const auto w = mean_and_se(column(slice, get_wait));
      const auto f = mean_and_se(column(slice, get_welfare));
      row(p, "utilization", u.mean, u.se);
      row(p, "avg_wait", w.mean, w.se);
      row(p, "welfare_rate", f.mean, f.se);
      if (sw.mode == SweepMode::flow) {
        flow_curve.push_back({p.value, u.mean, u.se, w.mean, w.se, f.mean, f.se});
      }
    }
  }

  report << "swept " << sw.parameter << " over " << values.size() << " points";
  if (sw.simulate) report << " with " << per << " seeds each";
  report << '\n';
  if (sw.mode == SweepMode::flow && flow_curve.size() >= 2) {
    const double knee = knee_utilization(flow_curve);
    if (knee < 0.0) {
      report << "no wait-time knee within the sweep\n";
    } else {
      report << "wait-time knee at utilization " << format_number(knee) << '\n';
    }
  }
  return {csv.str(), report.str()};
}

}  // namespace parking
