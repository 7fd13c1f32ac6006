#pragma once

#include <array>
#include <vector>

#include "dac/rng.hpp"
#include "dac/soma.hpp"
#include "dac/world.hpp"

namespace dac {

/// A predefined sensorimotor loop reducing one drive: steer toward attractor odors,
/// away from repulsor odors.
struct ReflexSpec {
  Drive drive = Drive::energy;
  std::vector<Odor> attractors;
  std::vector<Odor> repulsors;
  double gain = 10.0;

  /// False when a category is listed as both attractor and repulsor.
  bool valid() const;
};

struct ReflexParams {
  double noise_threshold = 0.01;  // below this on every relevant channel the reflex random-walks
  double walk_turn_sd = 0.2;      // radians
  double approach_gain = 10.0;
  double avoid_gain = 10.0;

  friend bool operator==(const ReflexParams&, const ReflexParams&) = default;
};

using DrivePriorities = std::array<double, kDriveCount>;
inline constexpr DrivePriorities kEqualPriorities{1.0, 1.0};

/// argmax_d error_d * priority_d, ties resolved in kDrives order.
Drive dominant_drive(const DriveError& errors, const DrivePriorities& priorities = kEqualPriorities);

/// One reflex per drive, indexed by index_of(Drive).
using ReflexSet = std::array<ReflexSpec, kDriveCount>;

/// Prey approach food when hungry and flee predator odor when unsafe; predators
/// approach prey odor when hungry and have nothing to avoid.
ReflexSet default_reflexes(EntityKind kind, const ReflexParams& params);

/// Braitenberg-style taxis. Positive turn_rate turns toward the left antenna.
/// Consumes the rng only when it falls back to the correlated random walk.
ActionCommand reflex_action(const Percept& percept, const ReflexSpec& spec, const MotionLimits& limits,
                            const ReflexParams& params, Rng& rng);

/// Uniformly random discrete action; the no-architecture control.
ActionCommand random_action(const MotionLimits& limits, Rng& rng);

}  // namespace dac
