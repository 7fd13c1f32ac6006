#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dac/agent.hpp"
#include "dac/rng.hpp"
#include "dac/world.hpp"

namespace dac {

struct SpawnRegion {
  double x_min = 0.0;
  double x_max = -1.0;  // negative upper bounds mean "arena edge"
  double y_min = 0.0;
  double y_max = -1.0;
  double heading = 10.0;  // outside [-pi, pi) means random

  friend bool operator==(const SpawnRegion&, const SpawnRegion&) = default;
};

struct ScenarioConfig {
  std::size_t prey = 8;
  std::size_t predators = 2;
  std::size_t food = 6;
  std::vector<std::pair<double, double>> food_positions;  // empty: uniform random placement
  bool wolfpack = false;
  double coop_radius = 6.0;   // R_coop
  double hit_damage = 0.25;   // delta
  double kill_energy = 0.3;   // shared among captors when a prey dies of damage
  std::size_t epoch_length = 2000;
  std::size_t epochs = 50;
  bool freeze_prey = false;
  bool freeze_predators = false;
  bool relocate_on_eat = false;  // a prey that eats food is moved back into its spawn region
  ArchitectureProfile prey_profile = profiles::full;
  ArchitectureProfile predator_profile = profiles::full;
  SpawnRegion prey_spawn;
  SpawnRegion predator_spawn;
  WorldParams world;
  AgentParams agent;

  /// Throws Error(config) naming the offending key.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Damage events from predator-prey contacts, plus which predators share credit
/// for each damaged prey.
struct CaptureResult {
  EventList damage;
  std::map<EntityId, std::vector<EntityId>> captors;
};

/// Without the pack rule any contact deals `damage`. With it, a contacted prey is
/// damaged only when at least two live predators are within `coop_radius` of it,
/// and all of those share the credit. At most one damage event per prey per step.
CaptureResult resolve_capture(const World& world, bool wolfpack, double coop_radius, double damage);

/// Re-randomizes the pose inside `region`, restores the body, keeps every learned
/// structure. Throws Error(agent_alive) for a live agent.
void respawn(Agent& agent, World& world, const SpawnRegion& region, Rng& rng);

struct EpochMetrics {
  std::uint64_t epoch = 0;
  std::uint64_t steps = 0;
  std::uint64_t captures = 0;
  std::optional<double> captures_per_predator_per_1000;  // nullopt when there are no predators
  std::uint64_t prey_deaths = 0;
  std::uint64_t prey_starvations = 0;
  std::uint64_t predator_deaths = 0;
  double mean_prey_lifetime = 0.0;
  bool prey_lifetime_censored = false;  // no prey died: mean age of living prey instead
  std::optional<double> mean_prey_energy;
  std::optional<double> mean_predator_energy;
  double prey_energy_intake = 0.0;       // per prey per 1000 steps
  double predator_energy_intake = 0.0;   // per predator per 1000 steps
  double prey_prototypes = 0.0;          // mean over the population at epoch end
  double predator_prototypes = 0.0;
  std::uint64_t prey_goal_attempts = 0;
  std::uint64_t prey_goal_successes = 0;
  std::uint64_t predator_goal_attempts = 0;
  std::uint64_t predator_goal_successes = 0;

  double capture_rate() const { return captures_per_predator_per_1000.value_or(0.0); }
};

/// One JSON object, keys in the documented order.
std::string to_json_line(const EpochMetrics& m);
EpochMetrics epoch_metrics_from_json(const std::string& line);

inline constexpr std::string_view kTrajectoryHeader = "step,id,kind,x,y,heading,alive,energy,integrity";
inline constexpr std::string_view kEventHeader = "step,type,subject,object,amount";

/// A prey/predator ecology driven step by step.
class Simulation {
 public:
  Simulation(ScenarioConfig config, std::uint64_t seed);

  /// E steps of sense -> act -> world step -> capture -> body -> learn -> respawn.
  EpochMetrics run_epoch();
  /// A single step; returns its canonical event list.
  EventList step();

  void set_freeze(bool prey, bool predators);
  void set_trajectory_sink(std::ostream* out) { trajectory_ = out; }
  void set_event_sink(std::ostream* out) { events_ = out; }

  const ScenarioConfig& config() const { return config_; }
  const World& world() const { return world_; }
  std::vector<Agent>& agents() { return agents_; }
  const std::vector<Agent>& agents() const { return agents_; }
  std::uint64_t epochs_run() const { return epoch_; }
  /// Steps each live prey has lived so far, by agent id.
  std::uint64_t age(EntityId id) const;

 private:
  bool frozen(EntityKind kind) const;
  const SpawnRegion& spawn_region(EntityKind kind) const;
  Pose random_pose(const SpawnRegion& region);

  struct Accumulator {
    std::uint64_t steps = 0;
    std::uint64_t captures = 0;
    std::uint64_t prey_deaths = 0;
    std::uint64_t prey_starvations = 0;
    std::uint64_t predator_deaths = 0;
    double lifetime_sum = 0.0;
    double prey_energy_sum = 0.0;
    std::uint64_t prey_energy_n = 0;
    double predator_energy_sum = 0.0;
    std::uint64_t predator_energy_n = 0;
    double prey_intake = 0.0;
    double predator_intake = 0.0;
  };

  ScenarioConfig config_;
  World world_;
  Rng rng_;
  std::vector<Agent> agents_;
  std::map<EntityId, std::uint64_t> born_;
  Accumulator acc_;
  std::uint64_t epoch_ = 0;
  std::ostream* trajectory_ = nullptr;
  std::ostream* events_ = nullptr;
};

// ---------------------------------------------------------------------------
// Co-adaptation analysis

struct CoadaptationReport {
  std::vector<double> capture_changes;   // z-normalized first differences of capture rate
  std::vector<double> lifetime_changes;  // same for mean prey lifetime
  double capture_leads_lifetime = 0.0;   // corr(dC_k, dL_{k+1})
  double lifetime_leads_capture = 0.0;   // corr(dL_k, dC_{k+1})
  std::size_t alternations = 0;          // sign changes of (C_k - L_k), both z-normalized
  bool degenerate = false;
};

/// Needs at least 4 epochs; throws Error(config) otherwise. Constant inputs give
/// zero correlations and set `degenerate`.
CoadaptationReport coadaptation(std::span<const EpochMetrics> series);
std::string to_json(const CoadaptationReport& report);

/// Population z-score; all zeros when the series is constant.
std::vector<double> zscore(std::span<const double> x, bool* degenerate = nullptr);
/// Pearson correlation; 0 when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y, bool* degenerate = nullptr);
std::size_t sign_changes(std::span<const double> x);

}  // namespace dac
