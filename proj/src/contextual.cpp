#include "dac/contextual.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <string>
#include <tuple>

#include "dac/error.hpp"
#include "dac/snapshot.hpp"

namespace dac {

// ---------------------------------------------------------------------------
// TransitionGraph

void TransitionGraph::ensure_nodes(std::size_t n) {
  if (n <= nodes_) return;
  nodes_ = n;
  edges_.resize(n * kActionCount);
  totals_.resize(n * kActionCount, 0);
  arc_cache_.resize(n);
  stale_.resize(n, 1);
}

void TransitionGraph::check(std::size_t p, std::size_t a) const {
  if (p >= nodes_ || a >= kActionCount) throw Error(ErrorCode::invalid_index, "transition index out of range");
}

void TransitionGraph::record(std::size_t p, std::size_t a, std::size_t next) {
  check(p, a);
  if (next >= nodes_) throw Error(ErrorCode::invalid_index, "transition index out of range");
  ++edges_[slot(p, a)][next];
  ++totals_[slot(p, a)];
  stale_[p] = 1;
}

std::uint64_t TransitionGraph::count(std::size_t p, std::size_t a, std::size_t next) const {
  check(p, a);
  const auto& m = edges_[slot(p, a)];
  const auto it = m.find(next);
  return it == m.end() ? 0 : it->second;
}

std::uint64_t TransitionGraph::total(std::size_t p, std::size_t a) const {
  check(p, a);
  return totals_[slot(p, a)];
}

double TransitionGraph::probability(std::size_t p, std::size_t a, std::size_t next) const {
  const std::uint64_t t = total(p, a);
  return t == 0 ? 0.0 : static_cast<double>(count(p, a, next)) / static_cast<double>(t);
}

const std::map<std::size_t, std::uint64_t>& TransitionGraph::successors(std::size_t p, std::size_t a) const {
  check(p, a);
  return edges_[slot(p, a)];
}

const std::vector<TransitionGraph::Arc>& TransitionGraph::arcs(std::size_t p) const {
  check(p, 0);
  if (stale_[p]) {
    auto& out = arc_cache_[p];
    out.clear();
    for (std::size_t a = 0; a < kActionCount; ++a) {
      const std::size_t s = slot(p, a);
      const double total = static_cast<double>(totals_[s]);
      for (const auto& [next, n] : edges_[s])
        if (n > 0)
          out.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(next),
                         -std::log(static_cast<double>(n) / total)});
    }
    stale_[p] = 0;
  }
  return arc_cache_[p];
}

std::uint64_t TransitionGraph::edge_count() const {
  std::uint64_t n = 0;
  for (const auto& m : edges_) n += m.size();
  return n;
}

void TransitionGraph::write_edges(std::ostream& out) const {
  out << "# nodes " << nodes_ << '\n';
  for (std::size_t p = 0; p < nodes_; ++p)
    for (std::size_t a = 0; a < kActionCount; ++a)
      for (const auto& [next, n] : edges_[slot(p, a)]) out << p << ' ' << a << ' ' << next << ' ' << n << '\n';
}

TransitionGraph TransitionGraph::read_edges(std::istream& in) {
  struct Row {
    std::size_t p, a, next;
    std::uint64_t n;
  };
  std::vector<Row> rows;
  std::optional<std::size_t> declared;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream words(line);
    if (line.front() == '#') {
      std::string hash, key;
      std::size_t n = 0;
      if (words >> hash >> key >> n && key == "nodes") declared = n;
      continue;
    }
    Row r{};
    std::string extra;
    if (!(words >> r.p >> r.a >> r.next >> r.n) || (words >> extra) || r.a >= kActionCount)
      throw Error(ErrorCode::io, "malformed edge at line " + std::to_string(line_no));
    rows.push_back(r);
  }
  std::size_t nodes = declared.value_or(0);
  for (const Row& r : rows) {
    if (declared && (r.p >= *declared || r.next >= *declared))
      throw Error(ErrorCode::invalid_index, "edge beyond the declared node count");
    nodes = std::max({nodes, r.p + 1, r.next + 1});
  }
  TransitionGraph g(nodes);
  for (const Row& r : rows) {
    g.edges_[g.slot(r.p, r.a)][r.next] += r.n;
    g.totals_[g.slot(r.p, r.a)] += r.n;
    g.stale_[r.p] = 1;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Goals

double learning_progress(const std::deque<bool>& outcomes, std::size_t window) {
  if (window == 0 || outcomes.size() < 2 * window) return 0.0;
  const std::size_t start = outcomes.size() - 2 * window;
  double previous = 0.0;
  double recent = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    previous += outcomes[start + i] ? 1.0 : 0.0;
    recent += outcomes[start + window + i] ? 1.0 : 0.0;
  }
  const double w = static_cast<double>(window);
  return std::abs(recent / w) - std::abs(previous / w);
}

void GoalBook::update(std::size_t goal, bool success) {
  GoalRecord& r = records_[goal];
  r.goal = goal;
  r.outcomes.push_back(success);
  while (r.outcomes.size() > 2 * window_) r.outcomes.pop_front();
  r.progress = learning_progress(r.outcomes, window_);
  ++r.attempts;
  if (success) ++r.successes;
}

double GoalBook::progress(std::size_t goal) const {
  const GoalRecord* r = find(goal);
  return r == nullptr ? 0.0 : r->progress;
}

const GoalRecord* GoalBook::find(std::size_t goal) const {
  const auto it = records_.find(goal);
  return it == records_.end() ? nullptr : &it->second;
}

void GoalBook::write(std::ostream& out) const {
  SnapshotWriter w(out);
  w.put("goals.window", static_cast<std::uint64_t>(window_));
  w.put("goals.count", static_cast<std::uint64_t>(records_.size()));
  for (const auto& [goal, r] : records_) {
    std::string ring;
    for (bool b : r.outcomes) ring += b ? '1' : '0';
    w.put_words("goal", {std::to_string(goal), std::to_string(r.attempts), std::to_string(r.successes),
                         ring.empty() ? "-" : ring});
  }
}

GoalBook GoalBook::read(std::istream& in) {
  SnapshotReader r(in);
  GoalBook book(static_cast<std::size_t>(r.expect_u64("goals.window")));
  const auto n = r.expect_u64("goals.count");
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto w = r.expect("goal");
    if (w.size() != 4) throw Error(ErrorCode::snapshot, "malformed goal record");
    GoalRecord rec;
    rec.goal = std::stoull(w[0]);
    rec.attempts = std::stoull(w[1]);
    rec.successes = std::stoull(w[2]);
    if (w[3] != "-")
      for (char c : w[3]) rec.outcomes.push_back(c == '1');
    rec.progress = learning_progress(rec.outcomes, book.window_);
    book.records_[rec.goal] = rec;
  }
  return book;
}

std::size_t select_goal(const ValueTable& values, Drive d, const GoalBook& goals, const GoalParams& params, Rng& rng,
                        std::optional<std::size_t> exclude) {
  std::vector<std::size_t> candidates;
  candidates.reserve(values.rows());
  for (std::size_t p = 0; p < values.rows(); ++p)
    if (!exclude || p != *exclude) candidates.push_back(p);
  if (candidates.empty()) throw Error(ErrorCode::no_goals_available, "no goals available");

  if (rng.uniform() < params.exploration) return candidates[rng.below(candidates.size())];

  double best = -INFINITY;
  std::vector<std::size_t> ties;
  for (std::size_t p : candidates) {
    const double score = values.value(d, p) + params.progress_weight * std::max(goals.progress(p), 0.0);
    if (score > best) {
      best = score;
      ties.assign(1, p);
    } else if (score == best) {
      ties.push_back(p);
    }
  }
  return ties.size() == 1 ? ties.front() : ties[rng.below(ties.size())];
}

// ---------------------------------------------------------------------------
// Planning

double edge_cost(const TransitionGraph& graph, std::size_t p, std::size_t a, std::size_t next, double step_cost) {
  return -std::log(graph.probability(p, a, next)) + step_cost;
}

std::optional<Plan> plan(const TransitionGraph& graph, std::size_t from, std::size_t to, const PlanParams& params) {
  const std::size_t n = graph.nodes();
  if (from >= n || to >= n) return std::nullopt;
  Plan result;
  result.origin = from;
  result.goal = to;
  if (from == to) return result;

  struct Back {
    std::size_t node = SIZE_MAX;
    std::size_t action = SIZE_MAX;
  };
  std::vector<double> dist(n, INFINITY);
  std::vector<Back> back(n);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[from] = 0.0;
  open.push({0.0, from});

  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == to) break;
    for (const auto& arc : graph.arcs(u)) {
      const std::size_t v = arc.next, a = arc.action;
      if (done[v]) continue;
      const double nd = d + (arc.neg_log + params.step_cost);
      if (nd < dist[v] || (nd == dist[v] && std::tie(u, a) < std::tie(back[v].node, back[v].action))) {
        dist[v] = nd;
        back[v] = {u, a};
        open.push({nd, v});
      }
    }
  }
  if (!done[to]) return std::nullopt;

  for (std::size_t v = to; v != from; v = back[v].node) result.steps.push_back({back[v].action, v});
  std::reverse(result.steps.begin(), result.steps.end());
  result.cost = dist[to];
  return result;
}

PlanDecision plan_step(Plan& plan, std::size_t observed, std::size_t max_mismatches) {
  if (plan.complete()) return {PlanDecision::Kind::complete, 0};
  if (observed == plan.steps[plan.cursor].expected) {
    ++plan.cursor;
    plan.mismatches = 0;
    if (plan.complete()) return {PlanDecision::Kind::complete, 0};
    return {PlanDecision::Kind::act, plan.steps[plan.cursor].action};
  }
  if (observed == plan.current()) {
    plan.mismatches = 0;
    return {PlanDecision::Kind::act, plan.steps[plan.cursor].action};
  }
  if (++plan.mismatches > max_mismatches) return {PlanDecision::Kind::abort, 0};
  return {PlanDecision::Kind::act, plan.steps[plan.cursor].action};
}

// ---------------------------------------------------------------------------
// Memory

void EpisodeStore::append(const Episode& e) {
  if (!log_.empty() && e.step < log_.back().step)
    throw Error(ErrorCode::invalid_index, "episode appended out of step order");
  if (capacity_ == 0) return;
  if (log_.size() == capacity_) {
    const Episode& oldest = log_.front();
    auto& positions = index_[oldest.prototype];
    positions.pop_front();
    if (positions.empty()) index_.erase(oldest.prototype);
    log_.pop_front();
    ++first_seq_;
  }
  index_[e.prototype].push_back(first_seq_ + log_.size());
  log_.push_back(e);
}

std::vector<Episode> EpisodeStore::lookup(std::size_t prototype, std::size_t limit) const {
  std::vector<Episode> out;
  const auto it = index_.find(prototype);
  if (it == index_.end()) return out;
  for (auto pos = it->second.rbegin(); pos != it->second.rend() && out.size() < limit; ++pos)
    out.push_back(log_[static_cast<std::size_t>(*pos - first_seq_)]);
  return out;
}

void EpisodeStore::write_log(std::ostream& out) const {
  for (const Episode& e : log_) {
    out << e.step << ' ' << e.prototype << ' ' << e.action << ' ' << format_double(e.reward[Drive::safety]) << ' '
        << format_double(e.reward[Drive::energy]) << ' ';
    if (e.goal)
      out << *e.goal;
    else
      out << -1;
    out << '\n';
  }
}

void EpisodeStore::write(std::ostream& out) const {
  SnapshotWriter w(out);
  w.put("memory.capacity", static_cast<std::uint64_t>(capacity_));
  w.put("memory.evicted", first_seq_);
  w.put("memory.count", static_cast<std::uint64_t>(log_.size()));
  for (const Episode& e : log_) {
    w.put_words("episode", {std::to_string(e.step), std::to_string(e.prototype), std::to_string(e.action),
                            format_double(e.reward[Drive::safety]), format_double(e.reward[Drive::energy]),
                            e.goal ? std::to_string(*e.goal) : "-"});
  }
}

EpisodeStore EpisodeStore::read(std::istream& in) {
  SnapshotReader r(in);
  EpisodeStore store(static_cast<std::size_t>(r.expect_u64("memory.capacity")));
  const auto evicted = r.expect_u64("memory.evicted");
  const auto n = r.expect_u64("memory.count");
  store.first_seq_ = evicted;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto w = r.expect("episode");
    if (w.size() != 6) throw Error(ErrorCode::snapshot, "malformed episode");
    Episode e;
    e.step = std::stoull(w[0]);
    e.prototype = std::stoull(w[1]);
    e.action = std::stoull(w[2]);
    e.reward.value[index_of(Drive::safety)] = parse_double(w[3]);
    e.reward.value[index_of(Drive::energy)] = parse_double(w[4]);
    if (w[5] != "-") e.goal = std::stoull(w[5]);
    store.index_[e.prototype].push_back(store.first_seq_ + store.log_.size());
    store.log_.push_back(e);
  }
  return store;
}

}  // namespace dac
