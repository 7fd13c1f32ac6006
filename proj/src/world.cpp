#include "dac/world.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "dac/error.hpp"

namespace dac {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::no_such_agent: return "no_such_agent";
    case ErrorCode::invalid_command: return "invalid_command";
    case ErrorCode::incomplete_command_set: return "incomplete_command_set";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invalid_index: return "invalid_index";
    case ErrorCode::no_goals_available: return "no_goals_available";
    case ErrorCode::agent_dead: return "agent_dead";
    case ErrorCode::agent_alive: return "agent_alive";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    case ErrorCode::snapshot: return "snapshot";
  }
  return "unknown";
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::prey: return "prey";
    case EntityKind::predator: return "predator";
    case EntityKind::food: return "food";
  }
  return "unknown";
}

std::optional<EntityKind> parse_entity_kind(std::string_view text) {
  if (text == "prey") return EntityKind::prey;
  if (text == "predator") return EntityKind::predator;
  if (text == "food") return EntityKind::food;
  return std::nullopt;
}

std::string_view to_string(EventType type) {
  switch (type) {
    case EventType::eat: return "eat";
    case EventType::damage: return "damage";
    case EventType::death: return "death";
  }
  return "unknown";
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  a -= std::numbers::pi;
  if (a >= std::numbers::pi) a -= two_pi;
  return a;
}

ActionCommand command_for(std::size_t action, const MotionLimits& limits) {
  const double v = limits.max_speed;
  const double w = limits.max_turn;
  switch (static_cast<Action>(action)) {
    case Action::stop: return {0.0, 0.0};
    case Action::forward: return {v, 0.0};
    case Action::forward_left: return {v, 0.5 * w};
    case Action::forward_right: return {v, -0.5 * w};
    case Action::spin_left: return {0.0, w};
    case Action::spin_right: return {0.0, -w};
  }
  throw Error(ErrorCode::invalid_index, "action index out of range");
}

std::size_t nearest_action(const ActionCommand& cmd, const MotionLimits& limits) {
  const double sv = limits.max_speed > 0.0 ? cmd.forward_speed / limits.max_speed : 0.0;
  const double sw = limits.max_turn > 0.0 ? cmd.turn_rate / limits.max_turn : 0.0;
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t a = 0; a < kActionCount; ++a) {
    const ActionCommand c = command_for(a, limits);
    const double dv = sv - (limits.max_speed > 0.0 ? c.forward_speed / limits.max_speed : 0.0);
    const double dw = sw - (limits.max_turn > 0.0 ? c.turn_rate / limits.max_turn : 0.0);
    const double d = dv * dv + dw * dw;
    if (d < best_d) {
      best_d = d;
      best = a;
    }
  }
  return best;
}

bool within_limits(const ActionCommand& cmd, const MotionLimits& limits) {
  return std::isfinite(cmd.forward_speed) && std::isfinite(cmd.turn_rate) && cmd.forward_speed >= 0.0 &&
         cmd.forward_speed <= limits.max_speed && std::abs(cmd.turn_rate) <= limits.max_turn;
}

Pose apply_action(const Pose& pose, const ActionCommand& cmd, const MotionLimits& limits, double width,
                  double height) {
  if (!within_limits(cmd, limits)) throw Error(ErrorCode::invalid_command, "invalid command");
  Pose next;
  next.heading = wrap_angle(pose.heading + cmd.turn_rate);
  next.x = std::clamp(pose.x + cmd.forward_speed * std::cos(next.heading), 0.0, width);
  next.y = std::clamp(pose.y + cmd.forward_speed * std::sin(next.heading), 0.0, height);
  return next;
}

std::array<double, kPerceptDim> Percept::flatten() const {
  std::array<double, kPerceptDim> out{};
  for (std::size_t c = 0; c < kOdorCount; ++c) {
    out[2 * c] = odor[c].left;
    out[2 * c + 1] = odor[c].right;
  }
  return out;
}

void sort_events(EventList& events) {
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::tie(a.type, a.subject, a.object) < std::tie(b.type, b.subject, b.object);
  });
}

World::World(WorldParams params) : params_(params) {}

EntityId World::add_agent(EntityKind kind, const Pose& pose) {
  if (kind == EntityKind::food) throw Error(ErrorCode::invalid_index, "food is not an agent kind");
  const EntityId id = next_id_++;
  Entity e;
  e.id = id;
  e.kind = kind;
  e.pose = {std::clamp(pose.x, 0.0, params_.width), std::clamp(pose.y, 0.0, params_.height),
            wrap_angle(pose.heading)};
  e.radius = kind == EntityKind::prey ? params_.prey_radius : params_.predator_radius;
  agent_index_[id] = agents_.size();
  agents_.push_back(e);
  return id;
}

EntityId World::add_food(double x, double y) {
  FoodPatch f;
  f.id = next_id_++;
  f.pose = {std::clamp(x, 0.0, params_.width), std::clamp(y, 0.0, params_.height), 0.0};
  f.radius = params_.food_radius;
  food_.push_back(f);
  return f.id;
}

const Entity& World::agent(EntityId id) const {
  const auto it = agent_index_.find(id);
  if (it == agent_index_.end()) throw Error(ErrorCode::no_such_agent, "no such agent");
  return agents_[it->second];
}

Entity& World::agent_mut(EntityId id) {
  const auto it = agent_index_.find(id);
  if (it == agent_index_.end()) throw Error(ErrorCode::no_such_agent, "no such agent");
  return agents_[it->second];
}

bool World::is_alive(EntityId id) const { return agent(id).alive; }

void World::set_alive(EntityId id, bool alive) { agent_mut(id).alive = alive; }

void World::set_pose(EntityId id, const Pose& pose) {
  Entity& e = agent_mut(id);
  e.pose = {std::clamp(pose.x, 0.0, params_.width), std::clamp(pose.y, 0.0, params_.height),
            wrap_angle(pose.heading)};
}

const MotionLimits& World::limits(EntityKind kind) const {
  return kind == EntityKind::predator ? params_.predator_motion : params_.prey_motion;
}

Percept World::sense(EntityId id) const {
  const Entity& self = agent(id);
  if (!self.alive) throw Error(ErrorCode::no_such_agent, "no such agent");

  const double r = params_.antenna_offset;
  const double lx = self.pose.x + r * std::cos(self.pose.heading + params_.antenna_angle);
  const double ly = self.pose.y + r * std::sin(self.pose.heading + params_.antenna_angle);
  const double rx = self.pose.x + r * std::cos(self.pose.heading - params_.antenna_angle);
  const double ry = self.pose.y + r * std::sin(self.pose.heading - params_.antenna_angle);
  const double lambda = params_.odor_decay;

  Percept p;
  auto emit = [&](Odor category, double ex, double ey) {
    BilateralSample& s = p[category];
    s.left += std::exp(-std::hypot(lx - ex, ly - ey) / lambda);
    s.right += std::exp(-std::hypot(rx - ex, ry - ey) / lambda);
  };

  for (const FoodPatch& f : food_) {
    if (!f.available) continue;
    emit(Odor::food, f.pose.x, f.pose.y);
    const double d = std::hypot(self.pose.x - f.pose.x, self.pose.y - f.pose.y);
    if (d <= self.radius + f.radius) p.contacts.push_back({EntityKind::food, f.id, self.radius + f.radius - d});
  }
  for (const Entity& other : agents_) {
    if (other.id == id || !other.alive) continue;
    emit(odor_of(other.kind), other.pose.x, other.pose.y);
    const double d = std::hypot(self.pose.x - other.pose.x, self.pose.y - other.pose.y);
    if (d <= self.radius + other.radius)
      p.contacts.push_back({other.kind, other.id, self.radius + other.radius - d});
  }
  for (BilateralSample& s : p.odor) {
    s.left = std::min(1.0, s.left);
    s.right = std::min(1.0, s.right);
  }
  std::sort(p.contacts.begin(), p.contacts.end(),
            [](const Contact& a, const Contact& b) { return a.other < b.other; });
  return p;
}

EventList World::step(const std::map<EntityId, ActionCommand>& commands) {
  for (const auto& [id, cmd] : commands) {
    const Entity& e = agent(id);
    if (e.alive && !within_limits(cmd, limits(e.kind)))
      throw Error(ErrorCode::invalid_command, "invalid command");
  }
  for (const Entity& e : agents_) {
    if (e.alive && !commands.contains(e.id))
      throw Error(ErrorCode::incomplete_command_set, "incomplete command set");
  }

  // Every pose update reads only its own pre-step pose, so the snapshot is implicit.
  for (Entity& e : agents_) {
    if (!e.alive) continue;
    e.pose = apply_action(e.pose, commands.at(e.id), limits(e.kind), params_.width, params_.height);
  }

  EventList events;
  std::vector<bool> was_available(food_.size());
  for (std::size_t i = 0; i < food_.size(); ++i) {
    FoodPatch& f = food_[i];
    was_available[i] = f.available;
    if (!f.available) continue;
    const Entity* eater = nullptr;
    double best = INFINITY;
    for (const Entity& e : agents_) {
      if (!e.alive || e.kind != EntityKind::prey) continue;
      const double d = std::hypot(e.pose.x - f.pose.x, e.pose.y - f.pose.y);
      if (d <= e.radius + f.radius && d < best) {
        best = d;
        eater = &e;
      }
    }
    if (eater != nullptr) {
      events.push_back({EventType::eat, eater->id, f.id, params_.food_energy});
      f.available = false;
      f.regen_countdown = params_.food_regen_steps;
    }
  }
  for (std::size_t i = 0; i < food_.size(); ++i) {
    FoodPatch& f = food_[i];
    if (was_available[i]) continue;
    if (--f.regen_countdown <= 0) {
      f.regen_countdown = 0;
      f.available = true;
    }
  }

  ++step_;
  sort_events(events);
  return events;
}

}  // namespace dac
