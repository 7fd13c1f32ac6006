#include "dac/reactive.hpp"

#include <algorithm>
#include <cmath>

namespace dac {

bool ReflexSpec::valid() const {
  for (Odor a : attractors)
    if (std::find(repulsors.begin(), repulsors.end(), a) != repulsors.end()) return false;
  return true;
}

Drive dominant_drive(const DriveError& errors, const DrivePriorities& priorities) {
  Drive best = kDrives[0];
  double best_score = errors[best] * priorities[index_of(best)];
  for (Drive d : kDrives) {
    const double s = errors[d] * priorities[index_of(d)];
    if (s > best_score) {
      best = d;
      best_score = s;
    }
  }
  return best;
}

ReflexSet default_reflexes(EntityKind kind, const ReflexParams& params) {
  ReflexSet set;
  ReflexSpec& hunger = set[index_of(Drive::energy)];
  ReflexSpec& safety = set[index_of(Drive::safety)];
  hunger.drive = Drive::energy;
  hunger.gain = params.approach_gain;
  safety.drive = Drive::safety;
  safety.gain = params.avoid_gain;
  if (kind == EntityKind::predator) {
    hunger.attractors = {Odor::prey};
  } else {
    hunger.attractors = {Odor::food};
    safety.repulsors = {Odor::predator};
  }
  return set;
}

ActionCommand reflex_action(const Percept& percept, const ReflexSpec& spec, const MotionLimits& limits,
                            const ReflexParams& params, Rng& rng) {
  double strongest = 0.0;
  double steer = 0.0;
  for (Odor o : spec.attractors) {
    strongest = std::max({strongest, percept[o].left, percept[o].right});
    steer += percept[o].left - percept[o].right;
  }
  for (Odor o : spec.repulsors) {
    strongest = std::max({strongest, percept[o].left, percept[o].right});
    steer -= percept[o].left - percept[o].right;
  }

  const double w = limits.max_turn;
  if (strongest < params.noise_threshold) {
    return {limits.max_speed, std::clamp(rng.normal(0.0, params.walk_turn_sd), -w, w)};
  }
  const double turn = std::clamp(spec.gain * steer, -w, w);
  const double speed = w > 0.0 ? limits.max_speed * (1.0 - std::abs(turn) / w) : limits.max_speed;
  return {std::clamp(speed, 0.0, limits.max_speed), turn};
}

ActionCommand random_action(const MotionLimits& limits, Rng& rng) {
  return command_for(rng.below(kActionCount), limits);
}

}  // namespace dac
