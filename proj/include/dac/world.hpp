#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

namespace dac {

using EntityId = std::uint32_t;

enum class EntityKind : std::uint8_t { prey = 0, predator = 1, food = 2 };

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view text);

/// Odor categories, in the order they appear in a flattened percept.
enum class Odor : std::uint8_t { food = 0, prey = 1, predator = 2 };
inline constexpr std::size_t kOdorCount = 3;

constexpr Odor odor_of(EntityKind kind) {
  switch (kind) {
    case EntityKind::prey: return Odor::prey;
    case EntityKind::predator: return Odor::predator;
    case EntityKind::food: break;
  }
  return Odor::food;
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians in [-pi, pi), positive is counter-clockwise (left)

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Wraps an angle into [-pi, pi).
double wrap_angle(double angle);

struct MotionLimits {
  double max_speed = 1.0;  // length per step
  double max_turn = 0.5;   // radians per step

  friend bool operator==(const MotionLimits&, const MotionLimits&) = default;
};

struct ActionCommand {
  double forward_speed = 0.0;
  double turn_rate = 0.0;

  friend bool operator==(const ActionCommand&, const ActionCommand&) = default;
};

// Discrete action set shared by the learning layers.
enum class Action : std::uint8_t { stop, forward, forward_left, forward_right, spin_left, spin_right };
inline constexpr std::size_t kActionCount = 6;

ActionCommand command_for(std::size_t action, const MotionLimits& limits);
/// Index of the discrete action closest to `cmd` after normalising both axes by the limits.
std::size_t nearest_action(const ActionCommand& cmd, const MotionLimits& limits);
bool within_limits(const ActionCommand& cmd, const MotionLimits& limits);

/// Unicycle update, turn then move, clamped to [0, width] x [0, height].
/// Throws Error(invalid_command) for commands outside `limits`.
Pose apply_action(const Pose& pose, const ActionCommand& cmd, const MotionLimits& limits, double width,
                  double height);

struct BilateralSample {
  double left = 0.0;
  double right = 0.0;
};

struct Contact {
  EntityKind kind = EntityKind::food;
  EntityId other = 0;
  double magnitude = 0.0;  // overlap depth, (r_i + r_j) - distance
};

inline constexpr std::size_t kPerceptDim = 2 * kOdorCount;

struct Percept {
  std::array<BilateralSample, kOdorCount> odor{};
  std::vector<Contact> contacts;

  const BilateralSample& operator[](Odor o) const { return odor[static_cast<std::size_t>(o)]; }
  BilateralSample& operator[](Odor o) { return odor[static_cast<std::size_t>(o)]; }

  /// (food L, food R, prey L, prey R, predator L, predator R)
  std::array<double, kPerceptDim> flatten() const;
};

struct WorldParams {
  double width = 100.0;
  double height = 100.0;
  double odor_decay = 15.0;                          // lambda
  double antenna_angle = std::numbers::pi / 6.0;     // phi
  double antenna_offset = 1.5;                       // r_a
  int food_regen_steps = 200;
  double food_energy = 0.3;                          // amount carried by an eat event
  double prey_radius = 1.0;
  double predator_radius = 1.0;
  double food_radius = 1.0;
  MotionLimits prey_motion{1.0, 0.5};
  MotionLimits predator_motion{1.0, 0.5};

  friend bool operator==(const WorldParams&, const WorldParams&) = default;
};

struct Entity {
  EntityId id = 0;
  EntityKind kind = EntityKind::prey;
  Pose pose;
  double radius = 1.0;
  bool alive = true;
};

struct FoodPatch {
  EntityId id = 0;
  Pose pose;
  double radius = 1.0;
  bool available = true;
  int regen_countdown = 0;
};

enum class EventType : std::uint8_t { eat = 0, damage = 1, death = 2 };
std::string_view to_string(EventType type);

struct Event {
  EventType type = EventType::eat;
  EntityId subject = 0;  // the agent the event happens to
  EntityId object = 0;   // food eaten, attacker, or (for deaths) the subject itself
  double amount = 0.0;

  friend bool operator==(const Event&, const Event&) = default;
};

using EventList = std::vector<Event>;

/// Canonical order: (type, subject, object).
void sort_events(EventList& events);

/// The physical arena. Agents and food patches share one id space.
class World {
 public:
  explicit World(WorldParams params = {});

  EntityId add_agent(EntityKind kind, const Pose& pose);
  EntityId add_food(double x, double y);

  const WorldParams& params() const { return params_; }
  const std::vector<Entity>& agents() const { return agents_; }
  const std::vector<FoodPatch>& food() const { return food_; }
  std::uint64_t step_count() const { return step_; }

  /// Throws Error(no_such_agent) for unknown ids (alive or not).
  const Entity& agent(EntityId id) const;
  bool is_alive(EntityId id) const;
  void set_alive(EntityId id, bool alive);
  void set_pose(EntityId id, const Pose& pose);
  const MotionLimits& limits(EntityKind kind) const;

  /// Bilateral odor samples and contacts for a live agent.
  Percept sense(EntityId id) const;

  /// Moves every live agent from the pre-step snapshot, resolves food eating and
  /// regeneration, advances the step counter. Returns eat events in canonical order.
  EventList step(const std::map<EntityId, ActionCommand>& commands);

 private:
  Entity& agent_mut(EntityId id);

  WorldParams params_;
  std::vector<Entity> agents_;
  std::vector<FoodPatch> food_;
  std::map<EntityId, std::size_t> agent_index_;
  EntityId next_id_ = 0;
  std::uint64_t step_ = 0;
};

}  // namespace dac
