#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "dac/adaptive.hpp"
#include "dac/rng.hpp"
#include "dac/soma.hpp"

namespace dac {

// ---------------------------------------------------------------------------
// Relational learning
// ---------------------------------------------------------------------------

/// Counted action-conditioned transitions between prototypes.
class TransitionGraph {
 public:
  explicit TransitionGraph(std::size_t nodes = 0) { ensure_nodes(nodes); }

  void ensure_nodes(std::size_t n);
  std::size_t nodes() const { return nodes_; }

  /// N(p, a, next) += 1. Throws Error(invalid_index).
  void record(std::size_t p, std::size_t a, std::size_t next);

  std::uint64_t count(std::size_t p, std::size_t a, std::size_t next) const;
  std::uint64_t total(std::size_t p, std::size_t a) const;
  /// N / total, or 0 when (p, a) was never taken.
  double probability(std::size_t p, std::size_t a, std::size_t next) const;
  const std::map<std::size_t, std::uint64_t>& successors(std::size_t p, std::size_t a) const;
  std::uint64_t edge_count() const;
  struct Arc {
    std::uint32_t action;
    std::uint32_t next;
    double neg_log;  // -ln p(next | p, action)
  };
  /// Every counted edge out of p, actions ascending then successors ascending.
  /// Rebuilt lazily after p's counts change.
  const std::vector<Arc>& arcs(std::size_t p) const;

  /// Edge list: `# nodes N` header, then `p a next count` per line.
  void write_edges(std::ostream& out) const;
  /// Accepts the same format; `#` lines other than the nodes header are comments.
  static TransitionGraph read_edges(std::istream& in);

  friend bool operator==(const TransitionGraph& x, const TransitionGraph& y) {
    return x.nodes_ == y.nodes_ && x.edges_ == y.edges_ && x.totals_ == y.totals_;
  }

 private:
  std::size_t slot(std::size_t p, std::size_t a) const { return p * kActionCount + a; }
  void check(std::size_t p, std::size_t a) const;

  std::size_t nodes_ = 0;
  std::vector<std::map<std::size_t, std::uint64_t>> edges_;
  std::vector<std::uint64_t> totals_;
  mutable std::vector<std::vector<Arc>> arc_cache_;
  mutable std::vector<char> stale_;
};

inline void record_transition(TransitionGraph& graph, std::size_t p, std::size_t a, std::size_t next) {
  graph.record(p, a, next);
}

// ---------------------------------------------------------------------------
// Goal selection
// ---------------------------------------------------------------------------

/// mean(last `window` outcomes) - mean(the `window` before those); 0 until the
/// ring holds 2 * window outcomes.
double learning_progress(const std::deque<bool>& outcomes, std::size_t window);

struct GoalRecord {
  std::size_t goal = 0;
  std::deque<bool> outcomes;  // oldest first, at most 2 * window
  double progress = 0.0;
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;

  friend bool operator==(const GoalRecord&, const GoalRecord&) = default;
};

class GoalBook {
 public:
  explicit GoalBook(std::size_t window = 10) : window_(window) {}

  /// Appends an outcome, registering the goal on first use.
  void update(std::size_t goal, bool success);
  double progress(std::size_t goal) const;
  const GoalRecord* find(std::size_t goal) const;
  const std::map<std::size_t, GoalRecord>& records() const { return records_; }
  std::size_t window() const { return window_; }

  void write(std::ostream& out) const;
  static GoalBook read(std::istream& in);

  friend bool operator==(const GoalBook&, const GoalBook&) = default;

 private:
  std::size_t window_;
  std::map<std::size_t, GoalRecord> records_;
};

inline void update_goal_outcome(GoalBook& goals, std::size_t goal, bool success) { goals.update(goal, success); }

struct GoalParams {
  double progress_weight = 0.5;  // beta
  double exploration = 0.1;      // epsilon_g

  friend bool operator==(const GoalParams&, const GoalParams&) = default;
};

/// score(p) = V_d(p) + beta * max(LP(p), 0), epsilon_g-greedy with random tie-break,
/// over every prototype except `exclude`. Throws Error(no_goals_available).
std::size_t select_goal(const ValueTable& values, Drive d, const GoalBook& goals, const GoalParams& params, Rng& rng,
                        std::optional<std::size_t> exclude = std::nullopt);

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

struct PlanParams {
  double step_cost = 0.01;
  std::size_t max_mismatches = 2;  // m_max

  friend bool operator==(const PlanParams&, const PlanParams&) = default;
};

struct PlanStep {
  std::size_t action = 0;
  std::size_t expected = 0;  // prototype expected after the action

  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

/// A path through the transition graph. `cursor` indexes the next step to execute;
/// the node the agent should currently occupy is `current()`.
struct Plan {
  std::size_t origin = 0;
  std::size_t goal = 0;
  std::vector<PlanStep> steps;
  double cost = 0.0;
  std::size_t cursor = 0;
  std::size_t mismatches = 0;

  std::size_t current() const { return cursor == 0 ? origin : steps[cursor - 1].expected; }
  bool complete() const { return cursor >= steps.size(); }
  std::size_t remaining() const { return steps.size() - cursor; }

  friend bool operator==(const Plan&, const Plan&) = default;
};

double edge_cost(const TransitionGraph& graph, std::size_t p, std::size_t a, std::size_t next, double step_cost);

/// Minimum-cost path, edge cost -ln p(next | p, a) + step_cost over counted edges.
/// Equal-cost predecessors resolve to the smaller (prototype, action). nullopt when
/// the goal is unreachable or either id is unknown.
std::optional<Plan> plan(const TransitionGraph& graph, std::size_t from, std::size_t to, const PlanParams& params);

struct PlanDecision {
  enum class Kind : std::uint8_t { act, abort, complete };
  Kind kind = Kind::abort;
  std::size_t action = 0;
};

/// Advances the plan against the observed prototype:
///  observed == next expected node -> advance, emit the following action (or complete);
///  observed == current node       -> still in transit, re-emit the current action;
///  anything else                  -> mismatch; abort once mismatches exceed m_max.
PlanDecision plan_step(Plan& plan, std::size_t observed, std::size_t max_mismatches);

// ---------------------------------------------------------------------------
// Memory
// ---------------------------------------------------------------------------

struct Episode {
  std::uint64_t step = 0;
  std::size_t prototype = 0;
  std::size_t action = 0;
  RewardVector reward;
  std::optional<std::size_t> goal;

  friend bool operator==(const Episode&, const Episode&) = default;
};

/// Append-only autobiographical log addressable by prototype. When full, the
/// oldest tuple is evicted and removed from the index.
class EpisodeStore {
 public:
  explicit EpisodeStore(std::size_t capacity = 1'000'000) : capacity_(capacity) {}

  /// Throws Error(invalid_index) if `e.step` precedes the last stored step.
  void append(const Episode& e);
  /// Up to `limit` tuples with this prototype, most recent first.
  std::vector<Episode> lookup(std::size_t prototype, std::size_t limit) const;

  std::size_t size() const { return log_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t evicted() const { return first_seq_; }
  const Episode& at(std::size_t i) const { return log_.at(i); }

  /// `step prototype action r_safety r_energy goal` per line, goal -1 when none.
  void write_log(std::ostream& out) const;

  void write(std::ostream& out) const;
  static EpisodeStore read(std::istream& in);

  friend bool operator==(const EpisodeStore&, const EpisodeStore&) = default;

 private:
  std::size_t capacity_;
  std::deque<Episode> log_;
  std::uint64_t first_seq_ = 0;
  std::map<std::size_t, std::deque<std::uint64_t>> index_;
};

inline void memory_append(EpisodeStore& store, const Episode& e) { store.append(e); }
inline std::vector<Episode> memory_lookup(const EpisodeStore& store, std::size_t prototype, std::size_t limit) {
  return store.lookup(prototype, limit);
}

}  // namespace dac
