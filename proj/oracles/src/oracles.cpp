#include "dac/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dac/adaptive.hpp"
#include "dac/agent.hpp"
#include "dac/error.hpp"
#include "dac/rng.hpp"
#include "dac/snapshot.hpp"

namespace dac::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

}  // namespace

SmallMdp builtin_mdp() {
  // s0 -a0-> s1 (0), s0 -a1-> s2 (0.5), s1 -a0-> s2 (1), s1 -a1-> s0 (0),
  // s2 -a0-> s0 (-0.2), s2 -a1-> s2 (0.1)
  return SmallMdp{{{1, 2}, {2, 0}, {0, 2}}, {{0.0, 0.5}, {1.0, 0.0}, {-0.2, 0.1}}};
}

std::vector<std::array<double, 2>> value_iteration(const SmallMdp& mdp, double gamma) {
  std::vector<std::array<double, 2>> q(3, {0.0, 0.0});
  for (int it = 0; it < 100000; ++it) {
    double delta = 0.0;
    auto next = q;
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t a = 0; a < 2; ++a) {
        const auto& n = q[mdp.next[s][a]];
        next[s][a] = mdp.reward[s][a] + gamma * std::max(n[0], n[1]);
        delta = std::max(delta, std::abs(next[s][a] - q[s][a]));
      }
    q = next;
    if (delta < 1e-15) break;
  }
  return q;
}

std::vector<std::array<double, 2>> td_fixed_point(const SmallMdp& mdp, double alpha, double gamma,
                                                  std::size_t sweeps) {
  ValueTable t(TdParams{alpha, gamma});
  for (int i = 0; i < 3; ++i) t.add_row();
  // Only actions 0 and 1 exist; park the rest far below any return.
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 2; a < kActionCount; ++a) t.set(Drive::energy, s, a, -1e9);
  for (std::size_t k = 0; k < sweeps; ++k)
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t a = 0; a < 2; ++a) td_update(t, Drive::energy, s, a, mdp.reward[s][a], mdp.next[s][a]);
  std::vector<std::array<double, 2>> q(3);
  for (std::size_t s = 0; s < 3; ++s) q[s] = {t.q(Drive::energy, s, 0), t.q(Drive::energy, s, 1)};
  return q;
}

// ---------------------------------------------------------------------------

std::optional<double> reference_cost(const TransitionGraph& g, std::size_t from, std::size_t to, double step_cost) {
  const std::size_t n = g.nodes();
  if (from >= n || to >= n) return std::nullopt;
  std::vector<double> d(n, kInf);
  d[from] = 0.0;
  for (std::size_t round = 0; round + 1 < n; ++round) {
    bool changed = false;
    for (std::size_t u = 0; u < n; ++u) {
      if (d[u] == kInf) continue;
      for (std::size_t a = 0; a < kActionCount; ++a)
        for (const auto& [v, count] : g.successors(u, a)) {
          const double p = static_cast<double>(count) / static_cast<double>(g.total(u, a));
          const double c = d[u] - std::log(p) + step_cost;
          if (c < d[v]) {
            d[v] = c;
            changed = true;
          }
        }
    }
    if (!changed) break;
  }
  if (d[to] == kInf) return std::nullopt;
  return d[to];
}

std::optional<double> exhaustive_cost(const TransitionGraph& g, std::size_t from, std::size_t to, double step_cost) {
  const std::size_t n = g.nodes();
  if (from >= n || to >= n) return std::nullopt;
  if (from == to) return 0.0;
  double best = kInf;
  std::vector<bool> on_path(n, false);
  std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double cost) {
    if (u == to) {
      best = std::min(best, cost);
      return;
    }
    on_path[u] = true;
    for (std::size_t a = 0; a < kActionCount; ++a)
      for (const auto& [v, count] : g.successors(u, a)) {
        if (on_path[v]) continue;
        const double p = static_cast<double>(count) / static_cast<double>(g.total(u, a));
        dfs(v, cost - std::log(p) + step_cost);
      }
    on_path[u] = false;
  };
  dfs(from, 0.0);
  if (best == kInf) return std::nullopt;
  return best;
}

TransitionGraph random_graph(std::size_t nodes, double density, std::uint64_t seed) {
  Rng rng(seed);
  TransitionGraph g(nodes);
  for (std::size_t u = 0; u < nodes; ++u)
    for (std::size_t a = 0; a < kActionCount; ++a) {
      if (!rng.bernoulli(density)) continue;
      const std::size_t outcomes = 1 + rng.below(3);
      for (std::size_t k = 0; k < outcomes; ++k) {
        const std::size_t v = rng.below(nodes);
        const std::size_t times = 1 + rng.below(5);
        for (std::size_t t = 0; t < times; ++t) g.record(u, a, v);
      }
    }
  return g;
}

// ---------------------------------------------------------------------------

double learning_progress_fold(const std::vector<bool>& history, std::size_t window) {
  if (history.size() < 2 * window || window == 0) return 0.0;
  double recent = 0.0, previous = 0.0;
  const std::size_t n = history.size();
  for (std::size_t i = 0; i < window; ++i) {
    recent += history[n - 1 - i] ? 1.0 : 0.0;
    previous += history[n - 1 - window - i] ? 1.0 : 0.0;
  }
  const double w = static_cast<double>(window);
  return recent / w - previous / w;
}

// ---------------------------------------------------------------------------

std::vector<EntityId> brute_force_damaged(const World& world, bool wolfpack, double coop_radius) {
  std::vector<EntityId> out;
  for (const auto& prey : world.agents()) {
    if (!prey.alive || prey.kind != EntityKind::prey) continue;
    int touching = 0, near = 0;
    for (const auto& pred : world.agents()) {
      if (!pred.alive || pred.kind != EntityKind::predator) continue;
      const double dx = prey.pose.x - pred.pose.x, dy = prey.pose.y - pred.pose.y;
      const double d2 = dx * dx + dy * dy;
      const double r = prey.radius + pred.radius;
      if (d2 <= r * r) ++touching;
      if (d2 <= coop_radius * coop_radius) ++near;
    }
    if (touching > 0 && (!wolfpack || near >= 2)) out.push_back(prey.id);
  }
  return out;
}

// ---------------------------------------------------------------------------

double reference_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  // two-pass with compensated sums
  const double n = static_cast<double>(x.size());
  long double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    cxx += (x[i] - mx) * (x[i] - mx);
    cyy += (y[i] - my) * (y[i] - my);
  }
  if (cxx == 0 || cyy == 0) return 0.0;
  return static_cast<double>(cxy / std::sqrt(cxx * cyy));
}

double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double bootstrap_p_greater(const std::vector<double>& diffs, std::size_t resamples, std::uint64_t seed) {
  if (diffs.empty()) return 1.0;
  Rng rng(seed);
  std::size_t not_greater = 0;
  for (std::size_t b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i) s += diffs[rng.below(diffs.size())];
    if (s <= 0.0) ++not_greater;
  }
  return static_cast<double>(not_greater) / static_cast<double>(resamples);
}

double bootstrap_p_median_greater(const std::vector<double>& a, const std::vector<double>& b, std::size_t resamples,
                                  std::uint64_t seed) {
  if (a.empty() || b.empty()) return 1.0;
  Rng rng(seed);
  std::size_t not_greater = 0;
  std::vector<double> ra(a.size()), rb(b.size());
  for (std::size_t k = 0; k < resamples; ++k) {
    for (auto& v : ra) v = a[rng.below(a.size())];
    for (auto& v : rb) v = b[rng.below(b.size())];
    if (median(ra) <= median(rb)) ++not_greater;
  }
  return static_cast<double>(not_greater) / static_cast<double>(resamples);
}

// ---------------------------------------------------------------------------
// Suites

SuiteResult suite_mdp(double gamma_perturbation) {
  const double gamma = 0.95;
  const auto mdp = builtin_mdp();
  const auto ref = value_iteration(mdp, gamma);
  const auto got = td_fixed_point(mdp, 0.1, gamma + gamma_perturbation, 5000);
  double err = 0.0;
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 2; ++a) err = std::max(err, std::abs(ref[s][a] - got[s][a]));
  return {"mdp_value_iteration", err <= 1e-6, "max_entry_error=" + fmt(err)};
}

SuiteResult suite_shortest_path() {
  const PlanParams pp;
  std::size_t checked = 0, exhaustive = 0;
  double worst = 0.0;
  std::string failure;
  for (std::uint64_t g = 0; g < 100 && failure.empty(); ++g) {
    Rng pick(derive_seed(0x5ec7, g));
    const std::size_t n = 2 + pick.below(29);
    const TransitionGraph graph = random_graph(n, 0.3, derive_seed(0x9a7, g));
    for (std::size_t q = 0; q < 5; ++q) {
      const std::size_t from = pick.below(n), to = pick.below(n);
      const auto p = plan(graph, from, to, pp);
      const auto ref = reference_cost(graph, from, to, pp.step_cost);
      ++checked;
      if (p.has_value() != ref.has_value()) {
        failure = "reachability mismatch on graph " + std::to_string(g);
        break;
      }
      if (!p) continue;
      double replay = 0.0;
      std::size_t at = from;
      for (const auto& s : p->steps) {
        replay += edge_cost(graph, at, s.action, s.expected, pp.step_cost);
        at = s.expected;
      }
      if (at != to) failure = "plan does not end at goal on graph " + std::to_string(g);
      worst = std::max({worst, std::abs(p->cost - *ref), std::abs(replay - *ref)});
      if (n <= 8) {
        const auto ex = exhaustive_cost(graph, from, to, pp.step_cost);
        ++exhaustive;
        if (!ex) failure = "exhaustive search found no path on graph " + std::to_string(g);
        else worst = std::max(worst, std::abs(p->cost - *ex));
      }
    }
  }
  // every graph with at most 4 nodes and 1 action, all (from, to)
  for (std::size_t n = 2; n <= 4 && failure.empty(); ++n) {
    const std::size_t edges = n * n;
    for (std::uint64_t mask = 0; mask < (1ULL << edges); ++mask) {
      TransitionGraph graph(n);
      for (std::size_t e = 0; e < edges; ++e)
        if (mask >> e & 1) graph.record(e / n, 0, e % n);
      for (std::size_t from = 0; from < n; ++from)
        for (std::size_t to = 0; to < n; ++to) {
          const auto p = plan(graph, from, to, pp);
          const auto ex = exhaustive_cost(graph, from, to, pp.step_cost);
          ++exhaustive;
          if (p.has_value() != ex.has_value()) failure = "enumeration reachability mismatch";
          else if (p) worst = std::max(worst, std::abs(p->cost - *ex));
        }
    }
  }
  const bool ok = failure.empty() && worst <= 1e-9;
  return {"shortest_path", ok,
          (failure.empty() ? "" : failure + "; ") + "queries=" + std::to_string(checked) +
              " exhaustive=" + std::to_string(exhaustive) + " max_cost_error=" + fmt(worst)};
}

SuiteResult suite_lp_window() {
  std::size_t mismatches = 0, checks = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(derive_seed(0x1b, s));
    const std::size_t w = 1 + rng.below(12);
    GoalBook book(w);
    std::vector<bool> history;
    const double p = rng.uniform();
    for (std::size_t i = 0; i < 200; ++i) {
      const bool ok = rng.bernoulli(p);
      history.push_back(ok);
      book.update(7, ok);
      ++checks;
      if (std::abs(book.progress(7) - learning_progress_fold(history, w)) > 1e-12) ++mismatches;
    }
  }
  return {"lp_window_fold", mismatches == 0,
          "checks=" + std::to_string(checks) + " mismatches=" + std::to_string(mismatches)};
}

SuiteResult suite_geometry_capture() {
  std::size_t mismatches = 0, worlds = 0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    Rng rng(derive_seed(0xca7, s));
    WorldParams wp;
    wp.width = wp.height = 12.0;
    World w(wp);
    const std::size_t prey = 1 + rng.below(5), preds = rng.below(5);
    for (std::size_t i = 0; i < prey; ++i) w.add_agent(EntityKind::prey, {rng.uniform(0, 12), rng.uniform(0, 12), 0});
    for (std::size_t i = 0; i < preds; ++i)
      w.add_agent(EntityKind::predator, {rng.uniform(0, 12), rng.uniform(0, 12), 0});
    const double r = rng.uniform(0.0, 8.0);
    for (bool pack : {false, true}) {
      ++worlds;
      const CaptureResult got = resolve_capture(w, pack, r, 0.25);
      std::vector<EntityId> ids;
      for (const auto& e : got.damage) ids.push_back(e.subject);
      std::sort(ids.begin(), ids.end());
      if (ids != brute_force_damaged(w, pack, r)) ++mismatches;
    }
  }
  return {"geometry_capture", mismatches == 0,
          "worlds=" + std::to_string(worlds) + " mismatches=" + std::to_string(mismatches)};
}

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig c;
  c.prey = 3;
  c.predators = 2;
  c.food = 4;
  c.epoch_length = 300;
  c.epochs = 2;
  c.world.width = c.world.height = 40.0;
  return c;
}

std::string traced_run(const ScenarioConfig& c, std::uint64_t seed) {
  Simulation sim(c, seed);
  std::ostringstream traj, events, metrics;
  sim.set_trajectory_sink(&traj);
  sim.set_event_sink(&events);
  for (std::size_t k = 0; k < c.epochs; ++k) metrics << to_json_line(sim.run_epoch()) << '\n';
  std::string learners;
  for (const auto& a : sim.agents()) learners += a.snapshot();
  return metrics.str() + traj.str() + events.str() + learners;
}

}  // namespace

SuiteResult suite_determinism() {
  std::size_t runs = 0, differing = 0;
  for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
    const ScenarioConfig c = small_scenario();
    ++runs;
    if (traced_run(c, seed) != traced_run(c, seed)) ++differing;
  }
  const bool distinct = traced_run(small_scenario(), 1) != traced_run(small_scenario(), 2);
  return {"determinism_replay", differing == 0 && distinct,
          "replays=" + std::to_string(runs) + " differing=" + std::to_string(differing) +
              (distinct ? "" : " seeds_do_not_matter")};
}

SuiteResult suite_quantizer_vigilance() {
  std::size_t violations = 0, inputs = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(derive_seed(0x9a, s));
    QuantizerParams qp{0.3, 0.05, 256};
    PrototypeMap map(kPerceptDim, qp);
    for (std::size_t i = 0; i < 1000; ++i) {
      FeatureVector x;
      for (auto& v : x) v = rng.uniform();
      // independent replay: nearest centroid by exhaustive scan before the update
      double best = kInf;
      std::size_t best_id = 0;
      for (std::size_t p = 0; p < map.size(); ++p) {
        auto c = map.centroid(p);
        double d = 0;
        for (std::size_t k = 0; k < kPerceptDim; ++k) d += (x[k] - c[k]) * (x[k] - c[k]);
        d = std::sqrt(d);
        if (d < best) {
          best = d;
          best_id = p;
        }
      }
      const std::size_t before = map.size();
      const Assignment a = map.quantize(x);
      ++inputs;
      const bool full = before >= qp.capacity;
      if (a.created) {
        if (!(best > qp.vigilance) || full || a.id != before) ++violations;
      } else if (before == 0 || a.id != best_id || (best > qp.vigilance && !full)) {
        ++violations;
      }
    }
  }
  return {"quantizer_vigilance", violations == 0,
          "inputs=" + std::to_string(inputs) + " violations=" + std::to_string(violations)};
}

SuiteResult suite_q_bounded() {
  const double R = 1.0, gamma = 0.95, bound = R / (1 - gamma);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(derive_seed(0xb0, s));
    ValueTable t(TdParams{0.1 + 0.8 * rng.uniform(), gamma});
    const std::size_t n = 2 + rng.below(20);
    for (std::size_t i = 0; i < n; ++i) t.add_row();
    for (std::size_t k = 0; k < 20000; ++k) {
      const std::size_t p = rng.below(n), a = rng.below(kActionCount);
      const Drive d = rng.bernoulli(0.5) ? Drive::energy : Drive::safety;
      const double r = rng.uniform(-R, R);
      std::optional<std::size_t> next;
      if (!rng.bernoulli(0.05)) next = rng.below(n);
      td_update(t, d, p, a, r, next);
    }
    for (Drive d : kDrives)
      for (std::size_t p = 0; p < n; ++p)
        for (double q : t.row(d, p)) worst = std::max(worst, std::abs(q));
  }
  return {"q_boundedness", worst <= bound, "max_abs_q=" + fmt(worst) + " bound=" + fmt(bound)};
}

SuiteResult suite_graph_normalization() {
  double worst = 0.0;
  std::size_t pairs = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const TransitionGraph g = random_graph(2 + s, 0.5, derive_seed(0x6a, s));
    for (std::size_t u = 0; u < g.nodes(); ++u)
      for (std::size_t a = 0; a < kActionCount; ++a) {
        if (g.total(u, a) == 0) continue;
        ++pairs;
        double sum = 0.0;
        for (std::size_t v = 0; v < g.nodes(); ++v) sum += g.probability(u, a, v);
        worst = std::max(worst, std::abs(sum - 1.0));
      }
  }
  return {"graph_normalization", worst <= 1e-12, "pairs=" + std::to_string(pairs) + " max_error=" + fmt(worst)};
}

SuiteResult suite_freeze() {
  std::size_t changed = 0, agents = 0;
  ScenarioConfig c = small_scenario();
  Simulation sim(c, 5);
  sim.run_epoch();  // learn something first
  sim.set_freeze(true, true);
  std::vector<std::uint64_t> before;
  for (const auto& a : sim.agents()) before.push_back(a.learner_hash());
  sim.run_epoch();
  sim.run_epoch();
  for (std::size_t i = 0; i < sim.agents().size(); ++i) {
    ++agents;
    if (sim.agents()[i].learner_hash() != before[i]) ++changed;
  }
  // one population frozen: only the other may change
  sim.set_freeze(false, true);
  before.clear();
  for (const auto& a : sim.agents()) before.push_back(a.learner_hash());
  sim.run_epoch();
  for (std::size_t i = 0; i < sim.agents().size(); ++i)
    if (sim.agents()[i].kind() == EntityKind::predator && sim.agents()[i].learner_hash() != before[i]) ++changed;
  return {"freeze_bit_identity", changed == 0,
          "agents=" + std::to_string(agents) + " changed=" + std::to_string(changed)};
}

SuiteResult suite_profile_reduction() {
  // Structures present per profile follow its flags; dropping layers never adds any.
  std::size_t failures = 0, checks = 0;
  const auto names = preset_profile_names();
  WorldParams wp;
  for (const auto& big_name : names)
    for (const auto& small_name : names) {
      const ArchitectureProfile big = *parse_profile(big_name), small = *parse_profile(small_name);
      if (!small.subset_of(big)) continue;
      Agent a(0, EntityKind::prey, big, AgentParams{}, wp, 3);
      a.reduce_to(small);
      ++checks;
      const bool ok = a.profile() == small && a.adaptive().has_value() == small.adaptive &&
                      a.contextual().has_value() == small.contextual() && a.memory().has_value() == small.memory;
      if (!ok) ++failures;
    }
  // Reduced before the first step, a population behaves bit-identically to one
  // that never had the dropped layers.
  for (const auto& big_name : names)
    for (const auto& small_name : names) {
      const ArchitectureProfile big = *parse_profile(big_name), small = *parse_profile(small_name);
      if (!small.subset_of(big) || big == small) continue;
      ScenarioConfig cb = small_scenario(), cs = small_scenario();
      cb.prey_profile = cb.predator_profile = big;
      cs.prey_profile = cs.predator_profile = small;
      Simulation reduced(cb, 21), fresh(cs, 21);
      for (auto& agent : reduced.agents()) agent.reduce_to(small);
      std::ostringstream tr, tf;
      reduced.set_trajectory_sink(&tr);
      fresh.set_trajectory_sink(&tf);
      for (int t = 0; t < 300; ++t) {
        reduced.step();
        fresh.step();
      }
      ++checks;
      bool same = tr.str() == tf.str();
      for (std::size_t i = 0; same && i < fresh.agents().size(); ++i)
        same = reduced.agents()[i].snapshot() == fresh.agents()[i].snapshot();
      if (!same) ++failures;
    }
  // A scenario run under a reduced profile grows nothing the profile lacks.
  ScenarioConfig c = small_scenario();
  c.predators = 0;
  c.prey_profile = profiles::reactive_only;
  Simulation sim(c, 8);
  for (std::size_t k = 0; k < c.epochs; ++k) {
    const EpochMetrics m = sim.run_epoch();
    ++checks;
    if (m.prey_prototypes != 0.0 || m.prey_goal_attempts != 0) ++failures;
  }
  return {"profile_reduction", failures == 0,
          "checks=" + std::to_string(checks) + " failures=" + std::to_string(failures)};
}

std::vector<SuiteResult> run_suites(const VerifyOptions& options) {
  return {suite_mdp(options.mdp_gamma_perturbation),
          suite_shortest_path(),
          suite_lp_window(),
          suite_geometry_capture(),
          suite_determinism(),
          suite_quantizer_vigilance(),
          suite_q_bounded(),
          suite_graph_normalization(),
          suite_freeze(),
          suite_profile_reduction()};
}

std::string report_json(const std::vector<SuiteResult>& results) {
  nlohmann::ordered_json j;
  bool all = true;
  j["suites"] = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    all = all && r.pass;
    j["suites"].push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  }
  j["pass"] = all;
  return j.dump(2) + "\n";
}

}  // namespace dac::oracle
