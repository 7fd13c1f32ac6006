#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dac/adaptive.hpp"
#include "dac/contextual.hpp"
#include "dac/reactive.hpp"
#include "dac/rng.hpp"
#include "dac/soma.hpp"
#include "dac/world.hpp"

namespace dac {

/// Which layers an agent runs. The somatic layer is always on.
struct ArchitectureProfile {
  bool reactive = true;
  bool adaptive = true;
  bool goal_selection = true;
  bool planning = true;
  bool memory = true;

  /// planning and goal selection both need the adaptive layer's prototypes.
  bool valid() const { return (!planning || adaptive) && (!goal_selection || adaptive); }
  bool contextual() const { return goal_selection || planning; }
  /// True when every layer enabled here is also enabled in `other`.
  bool subset_of(const ArchitectureProfile& other) const;

  friend bool operator==(const ArchitectureProfile&, const ArchitectureProfile&) = default;
};

namespace profiles {
inline constexpr ArchitectureProfile reactive_only{true, false, false, false, false};
inline constexpr ArchitectureProfile adaptive{true, true, false, false, false};
inline constexpr ArchitectureProfile adaptive_goals{true, true, true, false, false};
inline constexpr ArchitectureProfile adaptive_planning{true, true, false, true, false};
inline constexpr ArchitectureProfile memory_planning{true, true, false, true, true};
inline constexpr ArchitectureProfile full{true, true, true, true, true};
/// No layer above the body: uniformly random discrete actions.
inline constexpr ArchitectureProfile random_control{false, false, false, false, false};
}  // namespace profiles

/// Preset names: REACTIVE_ONLY, ADAPTIVE, ADAPTIVE_GOALS, ADAPTIVE_PLANNING,
/// MEMORY_PLANNING, FULL, RANDOM_CONTROL.
std::optional<ArchitectureProfile> parse_profile(std::string_view name);
/// Preset name, or `custom:` followed by the enabled flags.
std::string to_string(const ArchitectureProfile& profile);
std::vector<std::string> preset_profile_names();

struct AgentParams {
  SomaParams soma;
  DriveWeights reward_weights = kUnitWeights;
  DrivePriorities priorities = kEqualPriorities;
  ReflexParams reflex;
  double panic_threshold = 0.5;  // error_safety at or above this pre-empts everything

  FeatureMode features = FeatureMode::bearing;
  double feature_floor = 0.01;  // bearing contrast is zeroed below this intensity
  QuantizerParams quantizer;
  TdParams td;
  EpsilonSchedule epsilon;
  double confidence_k = 10.0;
  double confidence_gate = 0.5;  // theta_c

  GoalParams goals;
  std::size_t lp_window = 10;
  PlanParams planning;
  std::size_t goal_horizon = 150;
  std::size_t memory_capacity = 1'000'000;

  friend bool operator==(const AgentParams&, const AgentParams&) = default;
};

/// Which layer produced the last command.
enum class Layer : std::uint8_t { panic, plan, goal, adaptive, reflex, random };
std::string_view to_string(Layer layer);

struct Decision {
  Layer layer = Layer::reflex;
  Drive drive = Drive::energy;
  std::optional<std::size_t> prototype;
  std::size_t action = 0;  // discrete index (nearest one for continuous reflex output)
  ActionCommand command;
};

struct GoalAttempt {
  std::size_t goal = 0;
  std::uint64_t age = 0;

  friend bool operator==(const GoalAttempt&, const GoalAttempt&) = default;
};

struct AdaptiveState {
  PrototypeMap prototypes;
  ValueTable values;
  std::uint64_t updates = 0;  // drives the epsilon schedule

  friend bool operator==(const AdaptiveState&, const AdaptiveState&) = default;
};

struct ContextualState {
  TransitionGraph graph;
  GoalBook goals;
  std::optional<Plan> plan;
  std::optional<GoalAttempt> attempt;
};

/// Independent random streams, one per layer, derived from (master seed, agent id).
struct AgentStreams {
  Rng reflex;
  Rng adaptive;
  Rng contextual;

  friend bool operator==(const AgentStreams&, const AgentStreams&) = default;
};

/// One embodied agent: body, the three control loops, and their arbitration.
///
/// A step is act() -> world step -> absorb() -> learn() (or observe() when the
/// agent's population is frozen). act() quantizes the current percept unless
/// learn()/observe() already did so for it, so every percept is quantized once.
class Agent {
 public:
  Agent(EntityId id, EntityKind kind, ArchitectureProfile profile, AgentParams params, WorldParams world,
        std::uint64_t master_seed);

  EntityId id() const { return id_; }
  EntityKind kind() const { return kind_; }
  const ArchitectureProfile& profile() const { return profile_; }
  const AgentParams& params() const { return params_; }
  const InternalState& internal() const { return internal_; }
  bool alive() const { return !internal_.dead(); }

  const std::optional<AdaptiveState>& adaptive() const { return adaptive_; }
  const std::optional<ContextualState>& contextual() const { return contextual_; }
  const std::optional<EpisodeStore>& memory() const { return memory_; }
  const AgentStreams& streams() const { return streams_; }
  const Decision& last_decision() const { return decision_; }
  std::uint64_t quantize_calls() const { return quantize_calls_; }
  std::uint64_t experience_steps() const { return steps_; }

  /// Arbitration cascade: panic escape > active plan > adaptive policy > reflex.
  /// With `learning` false the quantizer is read-only. Throws Error(agent_dead).
  ActionCommand act(const Percept& percept, bool learning = true);

  /// Somatic update for the last command and this step's events.
  void absorb(std::span<const Event> events);

  /// Learning pipeline for the last transition. `next` is the percept after the
  /// step, absent when the agent died.
  void learn(const std::optional<Percept>& next);

  /// Frozen counterpart of learn(): tracks the next prototype and goal attempt
  /// without modifying any learned structure.
  void observe(const std::optional<Percept>& next);

  /// Proposes a goal and a plan when none is active. Public for scripted tests.
  void goal_cycle(std::size_t current, Drive drive, bool learning);

  /// Back to full internal variables with learned structures kept. Throws Error(agent_alive).
  void respawn();

  /// The body was moved by the environment: forget the cached prototype and the
  /// plan in progress. The goal attempt stays open and is replanned next step.
  void relocated();
  /// Drops layers. The new profile must be a subset of the current one.
  void reduce_to(const ArchitectureProfile& profile);

  /// Test and warm-start hooks.
  void set_internal(const InternalState& s) { internal_ = s; }
  void set_plan(const Plan& plan, std::size_t goal);

  /// Learned structures only (prototypes, values, graph, goals, memory, schedule step).
  std::string learner_state() const;
  std::uint64_t learner_hash() const;

  std::string snapshot() const;
  static Agent restore(std::string_view text, AgentParams params, WorldParams world);

 private:
  Agent() = default;

  std::optional<std::size_t> observe_prototype(const Percept& percept, bool learning);
  void grow_tables();
  void resolve_attempt(std::optional<std::size_t> next, bool learning);

  EntityId id_ = 0;
  EntityKind kind_ = EntityKind::prey;
  ArchitectureProfile profile_;
  AgentParams params_;
  WorldParams world_;
  ReflexSet reflexes_;
  InternalState internal_;
  InternalState before_;
  AgentStreams streams_;

  std::optional<AdaptiveState> adaptive_;
  std::optional<ContextualState> contextual_;
  std::optional<EpisodeStore> memory_;

  std::optional<std::size_t> cached_prototype_;
  Decision decision_;
  bool pending_ = false;
  std::uint64_t steps_ = 0;
  std::uint64_t quantize_calls_ = 0;
};

}  // namespace dac
