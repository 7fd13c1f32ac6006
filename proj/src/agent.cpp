#include "dac/agent.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "dac/error.hpp"
#include "dac/snapshot.hpp"

namespace dac {

namespace {

constexpr std::string_view kSnapshotMagic = "dac-agent-snapshot";
constexpr std::uint64_t kSnapshotVersion = 1;

struct NamedProfile {
  std::string_view name;
  ArchitectureProfile profile;
};

constexpr std::array<NamedProfile, 7> kPresets{{
    {"REACTIVE_ONLY", profiles::reactive_only},
    {"ADAPTIVE", profiles::adaptive},
    {"ADAPTIVE_GOALS", profiles::adaptive_goals},
    {"ADAPTIVE_PLANNING", profiles::adaptive_planning},
    {"MEMORY_PLANNING", profiles::memory_planning},
    {"FULL", profiles::full},
    {"RANDOM_CONTROL", profiles::random_control},
}};

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string flags_of(const ArchitectureProfile& p) {
  std::string s;
  auto add = [&](bool on, std::string_view name) {
    if (!on) return;
    if (!s.empty()) s += '+';
    s += name;
  };
  add(p.reactive, "reactive");
  add(p.adaptive, "adaptive");
  add(p.goal_selection, "goals");
  add(p.planning, "planning");
  add(p.memory, "memory");
  return s.empty() ? "none" : s;
}

}  // namespace

bool ArchitectureProfile::subset_of(const ArchitectureProfile& o) const {
  return (!reactive || o.reactive) && (!adaptive || o.adaptive) && (!goal_selection || o.goal_selection) &&
         (!planning || o.planning) && (!memory || o.memory);
}

std::optional<ArchitectureProfile> parse_profile(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return p.profile;
  constexpr std::string_view custom = "custom:";
  if (!name.starts_with(custom)) return std::nullopt;
  ArchitectureProfile p{false, false, false, false, false};
  std::string_view rest = name.substr(custom.size());
  if (rest == "none") return p;
  while (!rest.empty()) {
    const auto plus = rest.find('+');
    const std::string_view flag = rest.substr(0, plus);
    if (flag == "reactive") p.reactive = true;
    else if (flag == "adaptive") p.adaptive = true;
    else if (flag == "goals") p.goal_selection = true;
    else if (flag == "planning") p.planning = true;
    else if (flag == "memory") p.memory = true;
    else return std::nullopt;
    rest = plus == std::string_view::npos ? std::string_view{} : rest.substr(plus + 1);
  }
  return p;
}

std::string to_string(const ArchitectureProfile& profile) {
  for (const auto& p : kPresets)
    if (p.profile == profile) return std::string(p.name);
  return "custom:" + flags_of(profile);
}

std::vector<std::string> preset_profile_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::panic: return "panic";
    case Layer::plan: return "plan";
    case Layer::goal: return "goal";
    case Layer::adaptive: return "adaptive";
    case Layer::reflex: return "reflex";
    case Layer::random: return "random";
  }
  return "unknown";
}

Agent::Agent(EntityId id, EntityKind kind, ArchitectureProfile profile, AgentParams params, WorldParams world,
             std::uint64_t master_seed)
    : id_(id), kind_(kind), profile_(profile), params_(params), world_(world),
      reflexes_(default_reflexes(kind, params.reflex)) {
  if (!profile.valid()) throw Error(ErrorCode::config, "invalid architecture profile " + to_string(profile));
  const std::uint64_t base = derive_seed(master_seed, stream::agent, id);
  streams_.reflex = Rng(derive_seed(base, stream::reflex));
  streams_.adaptive = Rng(derive_seed(base, stream::adaptive));
  streams_.contextual = Rng(derive_seed(base, stream::contextual));
  if (profile.adaptive) adaptive_ = AdaptiveState{PrototypeMap(kPerceptDim, params.quantizer), ValueTable(params.td), 0};
  if (profile.contextual()) contextual_ = ContextualState{TransitionGraph{}, GoalBook(params.lp_window), {}, {}};
  if (profile.memory) memory_ = EpisodeStore(params.memory_capacity);
}

void Agent::grow_tables() {
  while (adaptive_->values.rows() < adaptive_->prototypes.size()) adaptive_->values.add_row();
  if (contextual_) contextual_->graph.ensure_nodes(adaptive_->prototypes.size());
}

std::optional<std::size_t> Agent::observe_prototype(const Percept& percept, bool learning) {
  if (!adaptive_) return std::nullopt;
  const FeatureVector f = percept_features(percept, params_.features, world_, params_.feature_floor);
  ++quantize_calls_;
  if (learning) {
    const Assignment a = adaptive_->prototypes.quantize(f);
    grow_tables();
    return a.id;
  }
  const auto a = adaptive_->prototypes.nearest(f);
  if (!a) return std::nullopt;
  return a->id;
}

ActionCommand Agent::act(const Percept& percept, bool learning) {
  if (!alive()) throw Error(ErrorCode::agent_dead, "agent is dead");

  const DriveError errors = drive_errors(internal_);
  const Drive drive = dominant_drive(errors, params_.priorities);
  const MotionLimits limits = kind_ == EntityKind::predator ? world_.predator_motion : world_.prey_motion;

  std::optional<std::size_t> p = cached_prototype_;
  if (!p) p = observe_prototype(percept, learning);
  cached_prototype_.reset();

  if (contextual_ && p) goal_cycle(*p, drive, learning);

  Decision d;
  d.drive = drive;
  d.prototype = p;
  bool decided = false;
  auto choose_discrete = [&](Layer layer, std::size_t action) {
    d.layer = layer;
    d.action = action;
    d.command = command_for(action, limits);
    decided = true;
  };

  if (profile_.reactive && errors[Drive::safety] >= params_.panic_threshold) {
    d.layer = Layer::panic;
    d.drive = Drive::safety;
    d.command = reflex_action(percept, reflexes_[index_of(Drive::safety)], limits, params_.reflex, streams_.reflex);
    d.action = nearest_action(d.command, limits);
    decided = true;
  }

  if (!decided && contextual_ && p) {
    ContextualState& ctx = *contextual_;
    if (ctx.plan) {
      const PlanDecision pd = plan_step(*ctx.plan, *p, params_.planning.max_mismatches);
      if (pd.kind == PlanDecision::Kind::act)
        choose_discrete(Layer::plan, pd.action);
      else
        ctx.plan.reset();
    } else if (!profile_.planning && ctx.attempt) {
      // Goal pursuit without a planner: one-step lookahead on the learned graph.
      double best = 0.0;
      std::size_t best_a = 0;
      for (std::size_t a = 0; a < kActionCount; ++a) {
        const double pr = ctx.graph.probability(*p, a, ctx.attempt->goal);
        if (pr > best) {
          best = pr;
          best_a = a;
        }
      }
      if (best > 0.0) choose_discrete(Layer::goal, best_a);
    }
  }

  if (!decided && adaptive_ && p &&
      (!profile_.reactive || confidence(adaptive_->prototypes, *p, params_.confidence_k) >= params_.confidence_gate)) {
    const double eps = params_.epsilon.at(adaptive_->updates);
    choose_discrete(Layer::adaptive, select_action(adaptive_->values, drive, *p, eps, streams_.adaptive));
  }

  if (!decided && profile_.reactive) {
    d.layer = Layer::reflex;
    d.command = reflex_action(percept, reflexes_[index_of(drive)], limits, params_.reflex, streams_.reflex);
    d.action = nearest_action(d.command, limits);
    decided = true;
  }

  if (!decided) choose_discrete(Layer::random, streams_.reflex.below(kActionCount));

  decision_ = d;
  pending_ = true;
  before_ = internal_;
  return d.command;
}

void Agent::goal_cycle(std::size_t current, Drive drive, bool learning) {
  if (!contextual_ || !adaptive_) return;
  ContextualState& ctx = *contextual_;
  if (ctx.plan) return;

  if (ctx.attempt) {
    if (!profile_.planning) return;
    auto replanned = plan(ctx.graph, current, ctx.attempt->goal, params_.planning);
    if (replanned) {
      ctx.plan = std::move(replanned);
    } else {
      if (learning) ctx.goals.update(ctx.attempt->goal, false);
      ctx.attempt.reset();
    }
    return;
  }

  if (adaptive_->values.rows() < 2) return;
  GoalParams gp = params_.goals;
  if (!profile_.goal_selection) gp = {0.0, 0.0};  // value-greedy target for a bare planner
  const std::size_t goal = select_goal(adaptive_->values, drive, ctx.goals, gp, streams_.contextual, current);
  if (profile_.planning) {
    auto p = plan(ctx.graph, current, goal, params_.planning);
    if (!p) {
      if (learning) ctx.goals.update(goal, false);
      return;
    }
    ctx.plan = std::move(p);
  }
  ctx.attempt = GoalAttempt{goal, 0};
}

void Agent::set_plan(const Plan& p, std::size_t goal) {
  if (!contextual_) throw Error(ErrorCode::config, "agent has no contextual layer");
  contextual_->plan = p;
  contextual_->attempt = GoalAttempt{goal, 0};
}

void Agent::absorb(std::span<const Event> events) {
  if (!pending_) return;
  internal_ = update_internal(before_, events, id_, decision_.command, params_.soma);
}

void Agent::resolve_attempt(std::optional<std::size_t> next, bool learning) {
  if (!contextual_ || !contextual_->attempt) return;
  ContextualState& ctx = *contextual_;
  GoalAttempt& at = *ctx.attempt;
  std::optional<bool> outcome;
  if (next && *next == at.goal)
    outcome = true;
  else if (!next || ++at.age >= params_.goal_horizon)
    outcome = false;
  if (!outcome) return;
  if (learning) ctx.goals.update(at.goal, *outcome);
  ctx.attempt.reset();
  ctx.plan.reset();
}

void Agent::learn(const std::optional<Percept>& next) {
  if (!pending_) return;
  pending_ = false;
  const bool alive_now = alive();

  std::optional<std::size_t> p_next;
  if (alive_now && next) p_next = observe_prototype(*next, true);
  cached_prototype_ = p_next;

  const RewardVector r = reward(drive_errors(before_), drive_errors(internal_), params_.reward_weights);
  const auto& p = decision_.prototype;

  if (adaptive_ && p) {
    for (Drive d : kDrives) td_update(adaptive_->values, d, *p, decision_.action, r[d], p_next);
    ++adaptive_->updates;
  }
  if (contextual_ && p && p_next) contextual_->graph.record(*p, decision_.action, *p_next);
  if (contextual_) {
    const std::optional<std::size_t> goal =
        contextual_->attempt ? std::optional<std::size_t>(contextual_->attempt->goal) : std::nullopt;
    resolve_attempt(alive_now ? p_next : std::nullopt, true);
    if (memory_ && p) memory_->append({steps_, *p, decision_.action, r, goal});
  } else if (memory_ && p) {
    memory_->append({steps_, *p, decision_.action, r, std::nullopt});
  }
  ++steps_;
}

void Agent::observe(const std::optional<Percept>& next) {
  if (!pending_) return;
  pending_ = false;
  std::optional<std::size_t> p_next;
  if (alive() && next) p_next = observe_prototype(*next, false);
  cached_prototype_ = p_next;
  resolve_attempt(alive() ? p_next : std::nullopt, false);
}

void Agent::respawn() {
  if (alive()) throw Error(ErrorCode::agent_alive, "respawn of a live agent");
  internal_ = InternalState{};
  before_ = internal_;
  cached_prototype_.reset();
  pending_ = false;
  if (contextual_) {
    contextual_->plan.reset();
    contextual_->attempt.reset();
  }
}

void Agent::relocated() {
  cached_prototype_.reset();
  if (contextual_) contextual_->plan.reset();
}

void Agent::reduce_to(const ArchitectureProfile& profile) {
  if (!profile.valid() || !profile.subset_of(profile_))
    throw Error(ErrorCode::config, "profile " + to_string(profile) + " is not a reduction of " + to_string(profile_));
  profile_ = profile;
  if (!profile.adaptive) {
    adaptive_.reset();
    cached_prototype_.reset();
  }
  if (!profile.contextual()) contextual_.reset();
  if (!profile.memory) memory_.reset();
  if (contextual_ && !profile.planning) contextual_->plan.reset();
}

std::string Agent::learner_state() const {
  std::ostringstream out;
  SnapshotWriter w(out);
  w.put("learner.adaptive", static_cast<std::uint64_t>(adaptive_.has_value()));
  if (adaptive_) {
    w.put("learner.updates", adaptive_->updates);
    adaptive_->prototypes.write(out);
    adaptive_->values.write(out);
  }
  w.put("learner.contextual", static_cast<std::uint64_t>(contextual_.has_value()));
  if (contextual_) {
    const TransitionGraph& g = contextual_->graph;
    w.put("graph.nodes", static_cast<std::uint64_t>(g.nodes()));
    w.put("graph.edges", g.edge_count());
    for (std::size_t p = 0; p < g.nodes(); ++p)
      for (std::size_t a = 0; a < kActionCount; ++a)
        for (const auto& [next, n] : g.successors(p, a))
          w.put_words("edge", {std::to_string(p), std::to_string(a), std::to_string(next), std::to_string(n)});
    contextual_->goals.write(out);
  }
  w.put("learner.memory", static_cast<std::uint64_t>(memory_.has_value()));
  if (memory_) memory_->write(out);
  return out.str();
}

std::uint64_t Agent::learner_hash() const { return fnv1a(learner_state()); }

std::string Agent::snapshot() const {
  std::ostringstream out;
  SnapshotWriter w(out);
  w.put(kSnapshotMagic, kSnapshotVersion);
  w.put("agent.id", static_cast<std::uint64_t>(id_));
  w.put("agent.kind", to_string(kind_));
  w.put("agent.profile", flags_of(profile_));
  w.put("agent.energy", internal_.energy);
  w.put("agent.integrity", internal_.integrity);
  w.put("agent.steps", steps_);
  w.put("agent.quantize_calls", quantize_calls_);
  w.put("agent.cached_prototype", cached_prototype_ ? std::to_string(*cached_prototype_) : "-");
  w.put("rng.reflex", streams_.reflex.serialize());
  w.put("rng.adaptive", streams_.adaptive.serialize());
  w.put("rng.contextual", streams_.contextual.serialize());
  out << learner_state();
  if (contextual_) {
    const auto& ctx = *contextual_;
    if (ctx.attempt)
      w.put_words("attempt", {std::to_string(ctx.attempt->goal), std::to_string(ctx.attempt->age)});
    else
      w.put("attempt", "-");
    if (ctx.plan) {
      const Plan& p = *ctx.plan;
      w.put_words("plan", {std::to_string(p.origin), std::to_string(p.goal), format_double(p.cost),
                           std::to_string(p.cursor), std::to_string(p.mismatches), std::to_string(p.steps.size())});
      for (const PlanStep& s : p.steps) w.put_words("plan.step", {std::to_string(s.action), std::to_string(s.expected)});
    } else {
      w.put("plan", "-");
    }
  }
  w.put("end", "-");
  return out.str();
}

Agent Agent::restore(std::string_view text, AgentParams params, WorldParams world) {
  std::istringstream in{std::string(text)};
  SnapshotReader r(in);
  if (r.expect_u64(kSnapshotMagic) != kSnapshotVersion) throw Error(ErrorCode::snapshot, "unsupported snapshot version");

  Agent a;
  a.params_ = params;
  a.world_ = world;
  a.id_ = static_cast<EntityId>(r.expect_u64("agent.id"));
  const auto kind = parse_entity_kind(r.expect_word("agent.kind"));
  if (!kind || *kind == EntityKind::food) throw Error(ErrorCode::snapshot, "bad agent kind");
  a.kind_ = *kind;
  a.reflexes_ = default_reflexes(a.kind_, params.reflex);

  const std::string flags = r.expect_word("agent.profile");
  const auto prof = parse_profile("custom:" + flags);
  if (!prof) throw Error(ErrorCode::snapshot, "bad profile flags " + flags);
  a.profile_ = *prof;
  a.internal_.energy = r.expect_double("agent.energy");
  a.internal_.integrity = r.expect_double("agent.integrity");
  a.before_ = a.internal_;
  a.steps_ = r.expect_u64("agent.steps");
  a.quantize_calls_ = r.expect_u64("agent.quantize_calls");
  const std::string cached = r.expect_word("agent.cached_prototype");
  if (cached != "-") a.cached_prototype_ = std::stoull(cached);
  a.streams_.reflex.deserialize(r.expect_line("rng.reflex"));
  a.streams_.adaptive.deserialize(r.expect_line("rng.adaptive"));
  a.streams_.contextual.deserialize(r.expect_line("rng.contextual"));

  if (r.expect_u64("learner.adaptive") != 0) {
    AdaptiveState st;
    st.updates = r.expect_u64("learner.updates");
    st.prototypes = PrototypeMap::read(in);
    st.values = ValueTable::read(in);
    a.adaptive_ = std::move(st);
  }
  if (r.expect_u64("learner.contextual") != 0) {
    ContextualState ctx{TransitionGraph(static_cast<std::size_t>(r.expect_u64("graph.nodes"))), GoalBook{}, {}, {}};
    const auto edges = r.expect_u64("graph.edges");
    std::ostringstream edge_text;
    edge_text << "# nodes " << ctx.graph.nodes() << '\n';
    for (std::uint64_t i = 0; i < edges; ++i) {
      const auto e = r.expect("edge");
      if (e.size() != 4) throw Error(ErrorCode::snapshot, "malformed edge");
      edge_text << e[0] << ' ' << e[1] << ' ' << e[2] << ' ' << e[3] << '\n';
    }
    std::istringstream edge_in(edge_text.str());
    ctx.graph = TransitionGraph::read_edges(edge_in);
    ctx.goals = GoalBook::read(in);
    a.contextual_ = std::move(ctx);
  }
  if (r.expect_u64("learner.memory") != 0) a.memory_ = EpisodeStore::read(in);

  if (a.contextual_) {
    const auto at = r.expect("attempt");
    if (!(at.size() == 1 && at[0] == "-")) {
      if (at.size() != 2) throw Error(ErrorCode::snapshot, "malformed attempt");
      a.contextual_->attempt = GoalAttempt{std::stoull(at[0]), std::stoull(at[1])};
    }
    const auto pl = r.expect("plan");
    if (!(pl.size() == 1 && pl[0] == "-")) {
      if (pl.size() != 6) throw Error(ErrorCode::snapshot, "malformed plan");
      Plan p;
      p.origin = std::stoull(pl[0]);
      p.goal = std::stoull(pl[1]);
      p.cost = parse_double(pl[2]);
      p.cursor = std::stoull(pl[3]);
      p.mismatches = std::stoull(pl[4]);
      const auto n = std::stoull(pl[5]);
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto s = r.expect("plan.step");
        if (s.size() != 2) throw Error(ErrorCode::snapshot, "malformed plan step");
        p.steps.push_back({std::stoull(s[0]), std::stoull(s[1])});
      }
      a.contextual_->plan = std::move(p);
    }
  }
  r.expect("end");
  return a;
}

}  // namespace dac
