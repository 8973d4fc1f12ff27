#include "parking/costly_game.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace parking {

void Strategy::validate(double tol) const {
  for (double p : as_array()) {
    if (!std::isfinite(p) || p < -tol || p > 1.0 + tol) {
      throw ParameterError("strategy components must lie in [0,1]");
    }
  }
  if (std::abs(p_observe + p_balk + p_join - 1.0) > tol) {
    throw ParameterError("strategy components must sum to 1");
  }
}

double max_abs_diff(const Strategy& a, const Strategy& b) {
  return std::max({std::abs(a.p_observe - b.p_observe), std::abs(a.p_balk - b.p_balk),
                   std::abs(a.p_join - b.p_join)});
}

GameSpec GameSpec::make(const QueueParams& q, const CostParams& costs, OutsideOption option) {
  q.validate();
  costs.validate();
  if (option == OutsideOption::offstreet && !costs.offstreet_cost) {
    throw ParameterError("offstreet_cost is required when the outside option is offstreet");
  }
  GameSpec spec;
  spec.queue = q;
  spec.costs = costs;
  spec.outside_option = option;
  spec.n_b = balking_level(q, costs);
  return spec;
}

StationaryDistribution stationary_costly(const GameSpec& spec, const Strategy& s) {
  const auto& q = spec.queue;
  const int threshold = spec.observe_threshold();
  const double informed_rate = std::max(0.0, 1.0 - s.p_balk) * q.lambda;
  const double blind_rate = std::max(0.0, s.p_join) * q.lambda;

  std::vector<double> rates(static_cast<std::size_t>(q.n));
  for (int k = 0; k < q.n; ++k) rates[k] = k < threshold ? informed_rate : blind_rate;

  auto dist = birth_death_stationary(rates, q.mu, q.c);
  dist.variant = StationaryDistribution::Variant::costly;
  dist.balk_threshold = threshold;
  return dist;
}

namespace {

double partial_expectation(const GameSpec& spec, const StationaryDistribution& dist, int upto) {
  double sum = 0.0;
  for (int k = 0; k < upto; ++k) sum += dist.probs[k] * total_utility(k, spec.queue, spec.costs);
  return sum;
}

}  // namespace

double utility_observe(const GameSpec& spec, const Strategy& s) {
  return utilities(spec, s).observe;
}

double utility_join(const GameSpec& spec, const Strategy& s) { return utilities(spec, s).join; }

double utility_balk(const GameSpec& spec) {
  if (spec.outside_option == OutsideOption::zero) return 0.0;
  return offstreet_utility(spec.queue, spec.costs);
}

Utilities utilities(const GameSpec& spec, const Strategy& s) {
  const auto dist = stationary_costly(spec, s);
  Utilities u;
  u.observe = partial_expectation(spec, dist, spec.observe_threshold()) - spec.costs.observe_cost;
  u.join = partial_expectation(spec, dist, spec.queue.n);
  u.balk = utility_balk(spec);
  return u;
}

namespace {

// Algorithm branches; `strict` is set when one action beats both others.
Strategy respond(const Utilities& u, const Strategy& s, double eps, bool& strict) {
  const double uo = u.observe, ub = u.balk, uj = u.join;
  strict = true;
  if (uo > std::max(uj, ub) + eps) return {1.0, 0.0, 0.0};
  if (uj > std::max(uo, ub) + eps) return {0.0, 0.0, 1.0};
  if (ub > std::max(uo, uj) + eps) return {0.0, 1.0, 0.0};
  strict = false;
  if (std::abs(uo - ub) < eps && std::min(uo, ub) > uj + eps) {
    const double mass = s.p_observe + s.p_balk;
    if (mass <= 0.0) return {0.5, 0.5, 0.0};
    return {s.p_observe / mass, s.p_balk / mass, 0.0};
  }
  if (std::abs(uj - ub) < eps && std::min(uj, ub) > uo + eps) {
    return {0.0, s.p_balk, 1.0 - s.p_balk};
  }
  if (std::abs(uj - uo) < eps && std::min(uj, uo) > ub + eps) {
    return {s.p_observe, 0.0, 1.0 - s.p_observe};
  }
  // At least two of the pairwise gaps are within eps: stay put.
  return s;
}

}  // namespace

Strategy best_response(const Utilities& u, const Strategy& s, double eps) {
  bool strict = false;
  return respond(u, s, eps, strict);
}

Strategy best_response(const GameSpec& spec, const Strategy& s, double eps) {
  return best_response(utilities(spec, s), s, eps);
}

double social_welfare(const GameSpec& spec, const Strategy& s) {
  const auto u = utilities(spec, s);
  return spec.queue.lambda * (s.p_observe * u.observe + s.p_balk * u.balk + s.p_join * u.join);
}

double equilibrium_residual(const Utilities& u, const Strategy& s) {
  const double mixed = s.p_observe * u.observe + s.p_balk * u.balk + s.p_join * u.join;
  return std::max(0.0, u.max() - mixed);
}

std::string to_string(SolutionKind kind) {
  return kind == SolutionKind::nash ? "nash" : "social";
}

void NashSettings::validate() const {
  if (!(eps > 0.0)) throw ParameterError("eps must be > 0");
  if (!(delta > 0.0)) throw ParameterError("delta must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0,1)");
  if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
  start.validate();
}

namespace {

Strategy mix(const Strategy& target, const Strategy& current, double keep) {
  Strategy out{(1.0 - keep) * target.p_observe + keep * current.p_observe,
               (1.0 - keep) * target.p_balk + keep * current.p_balk,
               (1.0 - keep) * target.p_join + keep * current.p_join};
  // Renormalize against drift; components stay nonnegative by convexity.
  const double total = out.p_observe + out.p_balk + out.p_join;
  out.p_observe /= total;
  out.p_balk /= total;
  out.p_join /= total;
  return out;
}

EquilibriumResult finish(const GameSpec& spec, const Strategy& s, SolutionKind kind) {
  EquilibriumResult r;
  r.strategy = s;
  r.utilities = utilities(spec, s);
  r.kind = kind;
  r.welfare = spec.queue.lambda * (s.p_observe * r.utilities.observe + s.p_balk * r.utilities.balk +
                                   s.p_join * r.utilities.join);
  r.residual = equilibrium_residual(r.utilities, s);
  return r;
}

}  // namespace

namespace {

double utility_of(const Utilities& u, int action) {
  return action == 0 ? u.observe : action == 1 ? u.balk : u.join;
}

Strategy on_edge(int a, int b, double t) {
  std::array<double, 3> p{0.0, 0.0, 0.0};
  p[a] = t;
  p[b] = 1.0 - t;
  return {p[0], p[1], p[2]};
}

// Equilibria with at most two actions in support: the three vertices, and
// the roots of U_a - U_b along each edge, located by scan and bisection.
std::vector<Strategy> edge_equilibria(const GameSpec& spec, double eps) {
  std::vector<Strategy> out;
  auto certify = [&](const Strategy& s) {
    if (equilibrium_residual(utilities(spec, s), s) <= eps) out.push_back(s);
  };
  for (int a = 0; a < 3; ++a) certify(on_edge(a, (a + 1) % 3, 1.0));

  constexpr int kScan = 64;
  constexpr int kEdges[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& e : kEdges) {
    auto gap = [&](double t) {
      const auto u = utilities(spec, on_edge(e[0], e[1], t));
      return utility_of(u, e[0]) - utility_of(u, e[1]);
    };
    double t0 = 0.0, g0 = gap(0.0);
    for (int k = 1; k <= kScan; ++k) {
      const double t1 = static_cast<double>(k) / kScan, g1 = gap(t1);
      if ((g0 < 0.0) != (g1 < 0.0) && g0 != 0.0 && g1 != 0.0) {
        double lo = t0, hi = t1, glo = g0;
        for (int i = 0; i < 100 && hi - lo > 1e-15; ++i) {
          const double mid = 0.5 * (lo + hi), gm = gap(mid);
          if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        certify(on_edge(e[0], e[1], 0.5 * (lo + hi)));
      }
      t0 = t1;
      g0 = g1;
    }
  }
  return out;
}

// Full-support equilibrium near `start`: Newton on U_o = U_b, U_j = U_b in
// the coordinates (P_o, P_b), with a finite-difference Jacobian.
std::optional<Strategy> interior_equilibrium(const GameSpec& spec, const Strategy& start,
                                             double eps) {
  auto residual = [&](double po, double pb) {
    const auto u = utilities(spec, {po, pb, 1.0 - po - pb});
    return std::array<double, 2>{u.observe - u.balk, u.join - u.balk};
  };
  auto norm = [](const std::array<double, 2>& f) { return std::max(std::abs(f[0]), std::abs(f[1])); };
  auto inside = [](double po, double pb) { return po >= 0.0 && pb >= 0.0 && po + pb <= 1.0; };

  double po = start.p_observe, pb = start.p_balk;
  auto f = residual(po, pb);
  constexpr double h = 1e-7;
  for (int it = 0; it < 60 && norm(f) > 1e-12; ++it) {
    const double ho = po + h <= 1.0 - pb ? h : -h;
    const double hb = pb + h <= 1.0 - po ? h : -h;
    const auto fo = residual(po + ho, pb);
    const auto fb = residual(po, pb + hb);
    const double j00 = (fo[0] - f[0]) / ho, j01 = (fb[0] - f[0]) / hb;
    const double j10 = (fo[1] - f[1]) / ho, j11 = (fb[1] - f[1]) / hb;
    const double det = j00 * j11 - j01 * j10;
    if (!std::isfinite(det) || std::abs(det) < 1e-300) return std::nullopt;
    const double dpo = -(j11 * f[0] - j01 * f[1]) / det;
    const double dpb = -(-j10 * f[0] + j00 * f[1]) / det;
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const double npo = po + t * dpo, npb = pb + t * dpb;
      if (!inside(npo, npb)) continue;
      const auto nf = residual(npo, npb);
      if (norm(nf) < norm(f)) {
        po = npo;
        pb = npb;
        f = nf;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  const Strategy s{po, pb, 1.0 - po - pb};
  if (norm(f) > 1e-3 * eps || equilibrium_residual(utilities(spec, s), s) > eps) return std::nullopt;
  return s;
}

// Moves the mass of an action onto an eps-tied action that is better, or exactly
// as good and earlier in observe, balk, join order, whenever the result is still
// an eps-equilibrium. Selects pure observation over an observe/join mix when the
// two are indistinguishable.
Strategy purify(const GameSpec& spec, Strategy s, double eps) {
  for (int round = 0; round < 3; ++round) {
    const auto u = utilities(spec, s);
    const auto p = s.as_array();
    bool moved = false;
    for (int from = 0; from < 3 && !moved; ++from) {
      for (int to = 0; to < 3 && !moved; ++to) {
        const double gain = utility_of(u, to) - utility_of(u, from);
        if (to == from || p[from] <= 0.0 || gain > eps) continue;
        if (gain < 0.0 || (gain == 0.0 && to > from)) continue;
        auto q = p;
        q[to] += q[from];
        q[from] = 0.0;
        const Strategy t{q[0], q[1], q[2]};
        if (equilibrium_residual(utilities(spec, t), t) <= eps) {
          s = t;
          moved = true;
        }
      }
    }
    if (!moved) break;
  }
  return s;
}

// Snaps the iterate onto the nearest exact edge equilibrium. A converged
// iterate far from every edge equilibrium is kept as is.
EquilibriumResult refine(const GameSpec& spec, const Strategy& s, const NashSettings& settings,
                         int iterations, bool converged) {
  auto candidates = edge_equilibria(spec, settings.eps);
  if (auto inner = interior_equilibrium(spec, s, settings.eps)) candidates.push_back(*inner);
  const Strategy* nearest = nullptr;
  for (const auto& c : candidates) {
    if (!nearest || max_abs_diff(c, s) < max_abs_diff(*nearest, s)) nearest = &c;
  }
  const bool snap = nearest && (!converged || max_abs_diff(*nearest, s) < 0.01);
  auto r = finish(spec, purify(spec, snap ? *nearest : s, settings.eps), SolutionKind::nash);
  r.iterations = iterations;
  r.converged = converged || snap;
  return r;
}

}  // namespace

EquilibriumResult nash_equilibrium(const GameSpec& spec, const NashSettings& settings) {
  settings.validate();
  Strategy s = settings.start;
  double step = 1.0 - settings.gamma;
  std::array<double, 3> prev_dir{0.0, 0.0, 0.0};
  bool have_prev = false;

  for (int it = 0; it < settings.max_iters; ++it) {
    const auto u = utilities(spec, s);
    bool strict = false;
    const Strategy target = respond(u, s, settings.eps, strict);
    const double change =
        std::abs(target.p_observe - s.p_observe) + std::abs(target.p_balk - s.p_balk);
    if (change < settings.delta) return refine(spec, s, settings, it, true);
    if (!strict) {
      s = mix(target, s, settings.gamma);
      continue;
    }
    const std::array<double, 3> dir{target.p_observe - s.p_observe, target.p_balk - s.p_balk,
                                    target.p_join - s.p_join};
    if (have_prev) {
      const double dot = dir[0] * prev_dir[0] + dir[1] * prev_dir[1] + dir[2] * prev_dir[2];
      if (dot < 0.0) step *= 0.5;
    }
    prev_dir = dir;
    have_prev = true;
    s = mix(target, s, 1.0 - step);
  }
  return refine(spec, s, settings, settings.max_iters, false);
}

EquilibriumResult socially_optimal_strategy(const GameSpec& spec,
                                            const SocialOptimumSettings& settings) {
  if (settings.grid_resolution < 10) throw ParameterError("grid_resolution must be >= 10");
  if (!(settings.min_step > 0.0)) throw ParameterError("min_step must be > 0");

  const int res = settings.grid_resolution;
  Strategy best{0.0, 1.0, 0.0};
  double best_welfare = social_welfare(spec, best);
  int evaluations = 1;
  for (int i = 0; i <= res; ++i) {
    for (int j = 0; i + j <= res; ++j) {
      const Strategy s{static_cast<double>(i) / res, static_cast<double>(j) / res,
                       static_cast<double>(res - i - j) / res};
      const double w = social_welfare(spec, s);
      ++evaluations;
      if (w > best_welfare) {
        best_welfare = w;
        best = s;
      }
    }
  }

  // Moves along e_a - e_b keep the point on the simplex plane.
  constexpr int kDirs[6][2] = {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}};
  double step = 1.0 / res;
  while (step >= settings.min_step) {
    bool improved = false;
    for (const auto& d : kDirs) {
      auto p = best.as_array();
      const double room = std::min(step, p[d[1]]);
      if (room <= 0.0) continue;
      p[d[0]] += room;
      p[d[1]] -= room;
      const Strategy cand{p[0], p[1], p[2]};
      const double w = social_welfare(spec, cand);
      ++evaluations;
      if (w > best_welfare) {
        best_welfare = w;
        best = cand;
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }

  auto r = finish(spec, best, SolutionKind::social_optimum);
  r.iterations = evaluations;
  r.converged = true;
  return r;
}

}  // namespace parking
