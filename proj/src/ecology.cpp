#include "dac/ecology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "dac/error.hpp"
#include "dac/snapshot.hpp"

namespace dac {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void bad(std::string_view key, std::string_view why) {
  throw Error(ErrorCode::config, std::string(key) + ": " + std::string(why));
}

double dist(const Pose& a, const Pose& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double goal_attempts(const Agent& a) {
  if (!a.contextual()) return 0;
  double n = 0;
  for (const auto& [g, r] : a.contextual()->goals.records()) n += static_cast<double>(r.attempts);
  return n;
}

double goal_successes(const Agent& a) {
  if (!a.contextual()) return 0;
  double n = 0;
  for (const auto& [g, r] : a.contextual()->goals.records()) n += static_cast<double>(r.successes);
  return n;
}

void check_region(const SpawnRegion& r, const WorldParams& w, std::string_view key) {
  double xmax = r.x_max < 0 ? w.width : r.x_max;
  double ymax = r.y_max < 0 ? w.height : r.y_max;
  if (r.x_min < 0 || r.y_min < 0 || r.x_min > xmax || r.y_min > ymax || xmax > w.width || ymax > w.height)
    bad(key, "spawn region outside the arena");
}

}  // namespace

void ScenarioConfig::validate() const {
  if (prey == 0 && predators == 0) bad("scenario.prey", "no agents");
  if (!food_positions.empty() && food_positions.size() != food)
    bad("scenario.food_positions", "count differs from scenario.food");
  for (const auto& [x, y] : food_positions)
    if (x < 0 || y < 0 || x > world.width || y > world.height) bad("scenario.food_positions", "outside the arena");
  if (wolfpack && predators < 2) bad("scenario.wolfpack", "needs at least 2 predators");
  if (!(coop_radius >= 0)) bad("scenario.coop_radius", "must be >= 0");
  if (!(hit_damage >= 0 && hit_damage <= 1)) bad("scenario.hit_damage", "must be in [0, 1]");
  if (!(kill_energy >= 0 && kill_energy <= 1)) bad("scenario.kill_energy", "must be in [0, 1]");
  if (epoch_length == 0) bad("scenario.epoch_length", "must be positive");
  if (epochs == 0) bad("scenario.epochs", "must be positive");
  if (!prey_profile.valid()) bad("prey.profile", "planning and goal selection need the adaptive layer");
  if (!predator_profile.valid()) bad("predator.profile", "planning and goal selection need the adaptive layer");
  if (!(world.width > 0 && world.height > 0)) bad("world.width", "arena must have positive size");
  if (!(world.odor_decay > 0)) bad("world.odor_decay", "must be positive");
  if (world.food_regen_steps < 0) bad("world.food_regen_steps", "must be >= 0");
  if (!(agent.quantizer.vigilance > 0)) bad("agent.vigilance", "must be positive");
  if (!(agent.quantizer.rate > 0 && agent.quantizer.rate <= 1)) bad("agent.quantizer_rate", "must be in (0, 1]");
  if (agent.quantizer.capacity == 0) bad("agent.capacity", "must be positive");
  if (!(agent.td.alpha > 0 && agent.td.alpha <= 1)) bad("agent.alpha", "must be in (0, 1]");
  if (!(agent.td.gamma >= 0 && agent.td.gamma < 1)) bad("agent.gamma", "must be in [0, 1)");
  if (agent.lp_window == 0) bad("agent.lp_window", "must be positive");
  if (agent.goal_horizon == 0) bad("agent.goal_horizon", "must be positive");
  if (agent.memory_capacity == 0) bad("agent.memory_capacity", "must be positive");
  check_region(prey_spawn, world, "prey.spawn");
  check_region(predator_spawn, world, "predator.spawn");
}

CaptureResult resolve_capture(const World& world, bool wolfpack, double coop_radius, double damage) {
  CaptureResult out;
  const auto& agents = world.agents();
  for (const auto& prey : agents) {
    if (!prey.alive || prey.kind != EntityKind::prey) continue;
    std::vector<EntityId> touching;
    std::vector<EntityId> near;
    for (const auto& pred : agents) {
      if (!pred.alive || pred.kind != EntityKind::predator) continue;
      double d = dist(prey.pose, pred.pose);
      if (d <= prey.radius + pred.radius) touching.push_back(pred.id);
      if (d <= coop_radius) near.push_back(pred.id);
    }
    if (touching.empty()) continue;
    std::vector<EntityId> captors;
    if (!wolfpack) {
      captors = touching;
    } else {
      if (near.size() < 2) continue;
      // every toucher is also near when coop_radius covers contact range; keep the union
      captors = near;
      for (EntityId t : touching)
        if (std::find(captors.begin(), captors.end(), t) == captors.end()) captors.push_back(t);
      std::sort(captors.begin(), captors.end());
    }
    out.damage.push_back({EventType::damage, prey.id, captors.front(), damage});
    out.captors.emplace(prey.id, std::move(captors));
  }
  sort_events(out.damage);
  return out;
}

namespace {

Pose draw_pose(const SpawnRegion& r, const WorldParams& w, Rng& rng) {
  double xmax = r.x_max < 0 ? w.width : r.x_max;
  double ymax = r.y_max < 0 ? w.height : r.y_max;
  Pose p;
  p.x = rng.uniform(r.x_min, xmax);
  p.y = rng.uniform(r.y_min, ymax);
  bool fixed = r.heading >= -std::numbers::pi && r.heading < std::numbers::pi;
  p.heading = fixed ? r.heading : rng.uniform(-std::numbers::pi, std::numbers::pi);
  return p;
}

}  // namespace

void respawn(Agent& agent, World& world, const SpawnRegion& region, Rng& rng) {
  if (agent.alive() || world.is_alive(agent.id()))
    throw Error(ErrorCode::agent_alive, "respawn of live agent " + std::to_string(agent.id()));
  agent.respawn();
  world.set_pose(agent.id(), draw_pose(region, world.params(), rng));
  world.set_alive(agent.id(), true);
}

// ---------------------------------------------------------------------------

Simulation::Simulation(ScenarioConfig config, std::uint64_t seed)
    : config_(std::move(config)), world_(config_.world), rng_(derive_seed(seed, stream::world)) {
  config_.validate();
  agents_.reserve(config_.prey + config_.predators);
  auto spawn = [&](EntityKind kind, const ArchitectureProfile& profile) {
    EntityId id = world_.add_agent(kind, random_pose(spawn_region(kind)));
    agents_.emplace_back(id, kind, profile, config_.agent, config_.world, seed);
    born_[id] = 0;
  };
  for (std::size_t i = 0; i < config_.prey; ++i) spawn(EntityKind::prey, config_.prey_profile);
  for (std::size_t i = 0; i < config_.predators; ++i) spawn(EntityKind::predator, config_.predator_profile);
  for (std::size_t i = 0; i < config_.food; ++i) {
    if (!config_.food_positions.empty()) {
      world_.add_food(config_.food_positions[i].first, config_.food_positions[i].second);
    } else {
      world_.add_food(rng_.uniform(0.0, config_.world.width), rng_.uniform(0.0, config_.world.height));
    }
  }
}

bool Simulation::frozen(EntityKind kind) const {
  return kind == EntityKind::prey ? config_.freeze_prey : config_.freeze_predators;
}

const SpawnRegion& Simulation::spawn_region(EntityKind kind) const {
  return kind == EntityKind::prey ? config_.prey_spawn : config_.predator_spawn;
}

Pose Simulation::random_pose(const SpawnRegion& region) { return draw_pose(region, config_.world, rng_); }

void Simulation::set_freeze(bool prey, bool predators) {
  config_.freeze_prey = prey;
  config_.freeze_predators = predators;
}

std::uint64_t Simulation::age(EntityId id) const {
  auto it = born_.find(id);
  if (it == born_.end()) throw Error(ErrorCode::no_such_agent, "no agent " + std::to_string(id));
  return world_.step_count() - it->second;
}

EventList Simulation::step() {
  std::map<EntityId, ActionCommand> commands;
  for (auto& a : agents_) {
    if (!a.alive()) continue;
    commands[a.id()] = a.act(world_.sense(a.id()), !frozen(a.kind()));
  }

  EventList events = world_.step(commands);
  CaptureResult capture = resolve_capture(world_, config_.wolfpack, config_.coop_radius, config_.hit_damage);
  events.insert(events.end(), capture.damage.begin(), capture.damage.end());

  for (auto& a : agents_)
    if (a.alive() && a.kind() == EntityKind::prey) a.absorb(events);

  std::vector<EntityId> died;
  for (auto& a : agents_) {
    if (a.kind() != EntityKind::prey || !world_.is_alive(a.id()) || a.alive()) continue;
    died.push_back(a.id());
    auto it = capture.captors.find(a.id());
    if (it != capture.captors.end()) {
      double share = config_.kill_energy / static_cast<double>(it->second.size());
      for (EntityId c : it->second) events.push_back({EventType::eat, c, a.id(), share});
      events.push_back({EventType::death, a.id(), it->second.front(), 0.0});
      ++acc_.captures;
    } else {
      events.push_back({EventType::death, a.id(), a.id(), 0.0});
      ++acc_.prey_starvations;
    }
    ++acc_.prey_deaths;
    acc_.lifetime_sum += static_cast<double>(age(a.id()));
  }

  for (auto& a : agents_)
    if (a.alive() && a.kind() == EntityKind::predator) a.absorb(events);
  for (auto& a : agents_) {
    if (a.kind() != EntityKind::predator || !world_.is_alive(a.id()) || a.alive()) continue;
    died.push_back(a.id());
    events.push_back({EventType::death, a.id(), a.id(), 0.0});
    ++acc_.predator_deaths;
  }
  for (EntityId id : died) world_.set_alive(id, false);
  sort_events(events);

  for (auto& a : agents_) {
    bool stepped = commands.contains(a.id());
    if (!stepped) continue;
    std::optional<Percept> next;
    if (a.alive()) next = world_.sense(a.id());
    if (frozen(a.kind())) {
      a.observe(next);
    } else {
      a.learn(next);
    }
  }

  ++acc_.steps;
  for (const auto& e : events) {
    if (e.type != EventType::eat) continue;
    const Entity& who = world_.agent(e.subject);
    (who.kind == EntityKind::prey ? acc_.prey_intake : acc_.predator_intake) += e.amount;
  }
  for (const auto& a : agents_) {
    if (!a.alive()) continue;
    if (a.kind() == EntityKind::prey) {
      acc_.prey_energy_sum += a.internal().energy;
      ++acc_.prey_energy_n;
    } else {
      acc_.predator_energy_sum += a.internal().energy;
      ++acc_.predator_energy_n;
    }
  }

  std::uint64_t t = world_.step_count();
  if (trajectory_) {
    char buf[256];
    for (const auto& a : agents_) {
      const Entity& e = world_.agent(a.id());
      std::snprintf(buf, sizeof buf, "%llu,%u,%s,%.6f,%.6f,%.6f,%d,", static_cast<unsigned long long>(t), e.id,
                    std::string(to_string(e.kind)).c_str(), e.pose.x, e.pose.y, e.pose.heading, e.alive ? 1 : 0);
      *trajectory_ << buf << format_double(a.internal().energy) << ',' << format_double(a.internal().integrity)
                   << '\n';
    }
    for (const auto& f : world_.food()) {
      std::snprintf(buf, sizeof buf, "%llu,%u,food,%.6f,%.6f,%.6f,%d,,\n", static_cast<unsigned long long>(t), f.id,
                    f.pose.x, f.pose.y, f.pose.heading, f.available ? 1 : 0);
      *trajectory_ << buf;
    }
  }
  if (events_) {
    for (const auto& e : events)
      *events_ << t << ',' << to_string(e.type) << ',' << e.subject << ',' << e.object << ','
               << format_double(e.amount) << '\n';
  }

  if (config_.relocate_on_eat) {
    for (auto& a : agents_) {
      if (a.kind() != EntityKind::prey || !a.alive()) continue;
      bool ate = std::any_of(events.begin(), events.end(), [&](const Event& e) {
        return e.type == EventType::eat && e.subject == a.id();
      });
      if (!ate) continue;
      world_.set_pose(a.id(), random_pose(config_.prey_spawn));
      a.relocated();
    }
  }

  for (auto& a : agents_) {
    if (a.alive()) continue;
    respawn(a, world_, spawn_region(a.kind()), rng_);
    born_[a.id()] = t;
  }
  return events;
}

EpochMetrics Simulation::run_epoch() {
  acc_ = {};
  double attempts0[2] = {0, 0}, successes0[2] = {0, 0};
  for (const auto& a : agents_) {
    int k = a.kind() == EntityKind::prey ? 0 : 1;
    attempts0[k] += goal_attempts(a);
    successes0[k] += goal_successes(a);
  }

  for (std::size_t i = 0; i < config_.epoch_length; ++i) step();

  EpochMetrics m;
  m.epoch = epoch_++;
  m.steps = acc_.steps;
  m.captures = acc_.captures;
  double kilo = static_cast<double>(acc_.steps) / 1000.0;
  if (config_.predators > 0) {
    m.captures_per_predator_per_1000 = static_cast<double>(acc_.captures) / (static_cast<double>(config_.predators) * kilo);
    m.predator_energy_intake = acc_.predator_intake / (static_cast<double>(config_.predators) * kilo);
  }
  if (config_.prey > 0) m.prey_energy_intake = acc_.prey_intake / (static_cast<double>(config_.prey) * kilo);
  m.prey_deaths = acc_.prey_deaths;
  m.prey_starvations = acc_.prey_starvations;
  m.predator_deaths = acc_.predator_deaths;
  if (acc_.prey_deaths > 0) {
    m.mean_prey_lifetime = acc_.lifetime_sum / static_cast<double>(acc_.prey_deaths);
  } else if (config_.prey > 0) {
    double sum = 0;
    for (const auto& a : agents_)
      if (a.kind() == EntityKind::prey) sum += static_cast<double>(age(a.id()));
    m.mean_prey_lifetime = sum / static_cast<double>(config_.prey);
    m.prey_lifetime_censored = true;
  }
  if (acc_.prey_energy_n) m.mean_prey_energy = acc_.prey_energy_sum / static_cast<double>(acc_.prey_energy_n);
  if (acc_.predator_energy_n)
    m.mean_predator_energy = acc_.predator_energy_sum / static_cast<double>(acc_.predator_energy_n);

  double attempts1[2] = {0, 0}, successes1[2] = {0, 0}, protos[2] = {0, 0};
  for (const auto& a : agents_) {
    int k = a.kind() == EntityKind::prey ? 0 : 1;
    attempts1[k] += goal_attempts(a);
    successes1[k] += goal_successes(a);
    if (a.adaptive()) protos[k] += static_cast<double>(a.adaptive()->prototypes.size());
  }
  if (config_.prey > 0) m.prey_prototypes = protos[0] / static_cast<double>(config_.prey);
  if (config_.predators > 0) m.predator_prototypes = protos[1] / static_cast<double>(config_.predators);
  m.prey_goal_attempts = static_cast<std::uint64_t>(attempts1[0] - attempts0[0]);
  m.prey_goal_successes = static_cast<std::uint64_t>(successes1[0] - successes0[0]);
  m.predator_goal_attempts = static_cast<std::uint64_t>(attempts1[1] - attempts0[1]);
  m.predator_goal_successes = static_cast<std::uint64_t>(successes1[1] - successes0[1]);
  return m;
}

// ---------------------------------------------------------------------------

namespace {

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<double> opt_of(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string to_json_line(const EpochMetrics& m) {
  ordered_json j;
  j["epoch"] = m.epoch;
  j["steps"] = m.steps;
  j["captures"] = m.captures;
  j["captures_per_predator_per_1000"] = opt(m.captures_per_predator_per_1000);
  if (!m.captures_per_predator_per_1000) j["no_predators"] = true;
  j["prey_deaths"] = m.prey_deaths;
  j["prey_starvations"] = m.prey_starvations;
  j["predator_deaths"] = m.predator_deaths;
  j["mean_prey_lifetime"] = m.mean_prey_lifetime;
  j["prey_lifetime_censored"] = m.prey_lifetime_censored;
  j["mean_prey_energy"] = opt(m.mean_prey_energy);
  j["mean_predator_energy"] = opt(m.mean_predator_energy);
  j["prey_energy_intake_per_1000"] = m.prey_energy_intake;
  j["predator_energy_intake_per_1000"] = m.predator_energy_intake;
  j["prey_prototypes"] = m.prey_prototypes;
  j["predator_prototypes"] = m.predator_prototypes;
  j["prey_goal_attempts"] = m.prey_goal_attempts;
  j["prey_goal_successes"] = m.prey_goal_successes;
  j["predator_goal_attempts"] = m.predator_goal_attempts;
  j["predator_goal_successes"] = m.predator_goal_successes;
  return j.dump();
}

EpochMetrics epoch_metrics_from_json(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
    EpochMetrics m;
    m.epoch = j.at("epoch").get<std::uint64_t>();
    m.steps = j.at("steps").get<std::uint64_t>();
    m.captures = j.at("captures").get<std::uint64_t>();
    m.captures_per_predator_per_1000 = opt_of(j.at("captures_per_predator_per_1000"));
    m.prey_deaths = j.at("prey_deaths").get<std::uint64_t>();
    m.prey_starvations = j.at("prey_starvations").get<std::uint64_t>();
    m.predator_deaths = j.at("predator_deaths").get<std::uint64_t>();
    m.mean_prey_lifetime = j.at("mean_prey_lifetime").get<double>();
    m.prey_lifetime_censored = j.at("prey_lifetime_censored").get<bool>();
    m.mean_prey_energy = opt_of(j.at("mean_prey_energy"));
    m.mean_predator_energy = opt_of(j.at("mean_predator_energy"));
    m.prey_energy_intake = j.at("prey_energy_intake_per_1000").get<double>();
    m.predator_energy_intake = j.at("predator_energy_intake_per_1000").get<double>();
    m.prey_prototypes = j.at("prey_prototypes").get<double>();
    m.predator_prototypes = j.at("predator_prototypes").get<double>();
    m.prey_goal_attempts = j.at("prey_goal_attempts").get<std::uint64_t>();
    m.prey_goal_successes = j.at("prey_goal_successes").get<std::uint64_t>();
    m.predator_goal_attempts = j.at("predator_goal_attempts").get<std::uint64_t>();
    m.predator_goal_successes = j.at("predator_goal_successes").get<std::uint64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("bad metrics line: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::vector<double> zscore(std::span<const double> x, bool* degenerate) {
  std::vector<double> z(x.size(), 0.0);
  if (x.empty()) {
    if (degenerate) *degenerate = true;
    return z;
  }
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(x.size()));
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
    if (degenerate) *degenerate = true;
    return z;
  }
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean) / sd;
  return z;
}

double pearson(std::span<const double> x, std::span<const double> y, bool* degenerate) {
  if (x.size() != y.size()) throw Error(ErrorCode::dimension_mismatch, "pearson: length mismatch");
  std::size_t n = x.size();
  if (n < 2) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0 && syy > 0)) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return sxy / std::sqrt(sxx * syy);
}

std::size_t sign_changes(std::span<const double> x) {
  std::size_t n = 0;
  int last = 0;
  for (double v : x) {
    int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++n;
    last = s;
  }
  return n;
}

CoadaptationReport coadaptation(std::span<const EpochMetrics> series) {
  if (series.size() < 4)
    throw Error(ErrorCode::config, "co-adaptation needs at least 4 epochs, got " + std::to_string(series.size()));
  std::vector<double> c, l;
  for (const auto& m : series) {
    c.push_back(m.capture_rate());
    l.push_back(m.mean_prey_lifetime);
  }
  CoadaptationReport r;
  bool deg = false;
  std::vector<double> dc(c.size() - 1), dl(l.size() - 1);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    dc[k] = c[k + 1] - c[k];
    dl[k] = l[k + 1] - l[k];
  }
  r.capture_changes = zscore(dc, &deg);
  r.lifetime_changes = zscore(dl, &deg);
  std::span<const double> zc(r.capture_changes), zl(r.lifetime_changes);
  std::size_t n = zc.size();
  r.capture_leads_lifetime = pearson(zc.first(n - 1), zl.subspan(1), &deg);
  r.lifetime_leads_capture = pearson(zl.first(n - 1), zc.subspan(1), &deg);

  bool level_deg = false;
  auto cz = zscore(c, &level_deg);
  auto lz = zscore(l, &level_deg);
  std::vector<double> gap(cz.size());
  for (std::size_t k = 0; k < cz.size(); ++k) gap[k] = cz[k] - lz[k];
  r.alternations = sign_changes(gap);
  r.degenerate = deg || level_deg;
  return r;
}

std::string to_json(const CoadaptationReport& r) {
  ordered_json j;
  j["epochs"] = r.capture_changes.size() + 1;
  j["capture_leads_lifetime"] = r.capture_leads_lifetime;
  j["lifetime_leads_capture"] = r.lifetime_leads_capture;
  j["alternations"] = r.alternations;
  j["degenerate"] = r.degenerate;
  j["capture_changes"] = r.capture_changes;
  j["lifetime_changes"] = r.lifetime_changes;
  return j.dump();
}

}  // namespace dac
