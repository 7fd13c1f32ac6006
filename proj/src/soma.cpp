#include "dac/soma.hpp"

#include <algorithm>

namespace dac {

std::string_view to_string(Drive d) { return d == Drive::energy ? "energy" : "safety"; }

InternalState update_internal(const InternalState& state, std::span<const Event> events, EntityId self,
                              const ActionCommand& cmd, const SomaParams& params) {
  if (state.dead()) return state;

  double gained = 0.0;
  double damage = 0.0;
  for (const Event& e : events) {
    if (e.subject != self) continue;
    if (e.type == EventType::eat) gained += e.amount;
    if (e.type == EventType::damage) damage += e.amount;
  }

  InternalState next;
  next.energy = std::clamp(state.energy - params.base_cost - params.move_cost * cmd.forward_speed + gained, 0.0, 1.0);
  next.integrity = std::clamp(state.integrity - damage + params.heal_rate, 0.0, 1.0);
  if (next.dead()) next = {0.0, 0.0};
  return next;
}

DriveError drive_errors(const InternalState& state) {
  DriveError e;
  e.value[index_of(Drive::energy)] = 1.0 - state.energy;
  e.value[index_of(Drive::safety)] = 1.0 - state.integrity;
  return e;
}

RewardVector reward(const DriveError& before, const DriveError& after, const DriveWeights& weights) {
  RewardVector r;
  for (std::size_t d = 0; d < kDriveCount; ++d) r.value[d] = weights[d] * (before.value[d] - after.value[d]);
  return r;
}

}  // namespace dac
