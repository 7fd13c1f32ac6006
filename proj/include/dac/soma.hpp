#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "dac/world.hpp"

namespace dac {

/// Regulated drives. The declaration order is the fixed tie-break order used by
/// drive arbitration (safety first).
enum class Drive : std::uint8_t { safety = 0, energy = 1 };
inline constexpr std::size_t kDriveCount = 2;
inline constexpr std::array<Drive, kDriveCount> kDrives{Drive::safety, Drive::energy};

constexpr std::size_t index_of(Drive d) { return static_cast<std::size_t>(d); }
std::string_view to_string(Drive d);

struct InternalState {
  double energy = 1.0;
  double integrity = 1.0;

  bool dead() const { return energy <= 0.0 || integrity <= 0.0; }
  friend bool operator==(const InternalState&, const InternalState&) = default;
};

struct SomaParams {
  double base_cost = 0.002;  // kappa_base, per step
  double move_cost = 0.002;  // kappa_move, per unit of forward speed
  double heal_rate = 0.001;  // rho_heal, per step

  friend bool operator==(const SomaParams&, const SomaParams&) = default;
};

/// error_d = 1 - value_d for each drive. Indexed by index_of(Drive).
struct DriveError {
  std::array<double, kDriveCount> value{};

  double operator[](Drive d) const { return value[index_of(d)]; }
  friend bool operator==(const DriveError&, const DriveError&) = default;
};

struct RewardVector {
  std::array<double, kDriveCount> value{};

  double operator[](Drive d) const { return value[index_of(d)]; }
  friend bool operator==(const RewardVector&, const RewardVector&) = default;
};

using DriveWeights = std::array<double, kDriveCount>;
inline constexpr DriveWeights kUnitWeights{1.0, 1.0};

/// One step of internal dynamics for agent `self`. Eat events addressed to `self`
/// add their amount to energy, damage events subtract their amount from integrity.
/// A dead state is returned unchanged; a state that reaches zero on either variable
/// collapses both to zero.
InternalState update_internal(const InternalState& state, std::span<const Event> events, EntityId self,
                              const ActionCommand& cmd, const SomaParams& params);

DriveError drive_errors(const InternalState& state);

RewardVector reward(const DriveError& before, const DriveError& after, const DriveWeights& weights = kUnitWeights);

}  // namespace dac
