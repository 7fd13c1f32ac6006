#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "dac/rng.hpp"
#include "dac/soma.hpp"
#include "dac/world.hpp"

namespace dac {

// ---------------------------------------------------------------------------
// Representation learning
// ---------------------------------------------------------------------------

/// How a percept is turned into the quantizer's input vector.
///  raw:     the flattened percept, (L, R) per odor category.
///  bearing: per category, the mean level (L + R) / 2 and the antenna log-contrast
///           scaled to [-1, 1] (approximately the sine of the bearing to the source).
enum class FeatureMode : std::uint8_t { raw, bearing };
std::string_view to_string(FeatureMode mode);
std::optional<FeatureMode> parse_feature_mode(std::string_view text);

using FeatureVector = std::array<double, kPerceptDim>;

FeatureVector percept_features(const Percept& percept, FeatureMode mode, const WorldParams& world,
                               double noise_threshold);

struct QuantizerParams {
  double vigilance = 0.25;  // rho
  double rate = 0.05;       // eta
  std::size_t capacity = 256;

  friend bool operator==(const QuantizerParams&, const QuantizerParams&) = default;
};

struct Assignment {
  std::size_t id = 0;
  bool created = false;
  double distance = 0.0;  // to the winning centroid before it moved
};

/// Online winner-take-all quantizer that grows a prototype whenever an input
/// falls outside the vigilance radius of every existing centroid.
class PrototypeMap {
 public:
  explicit PrototypeMap(std::size_t dim = kPerceptDim, QuantizerParams params = {});

  /// Assigns `x`, creating or moving a prototype. Throws Error(dimension_mismatch).
  Assignment quantize(std::span<const double> x);
  /// Nearest prototype without touching the map; nullopt when empty.
  std::optional<Assignment> nearest(std::span<const double> x) const;

  std::size_t size() const { return visits_.size(); }
  std::size_t dim() const { return dim_; }
  const QuantizerParams& params() const { return params_; }
  std::span<const double> centroid(std::size_t id) const;
  std::uint64_t visits(std::size_t id) const { return visits_.at(id); }

  void write(std::ostream& out) const;
  static PrototypeMap read(std::istream& in);

  friend bool operator==(const PrototypeMap&, const PrototypeMap&) = default;

 private:
  std::size_t dim_;
  QuantizerParams params_;
  std::vector<double> centroids_;
  std::vector<std::uint64_t> visits_;
};

// ---------------------------------------------------------------------------
// Value prediction
// ---------------------------------------------------------------------------

struct TdParams {
  double alpha = 0.1;
  double gamma = 0.95;

  friend bool operator==(const TdParams&, const TdParams&) = default;
};

using ActionValues = std::array<double, kActionCount>;

/// One Q table per drive over the shared prototype space.
class ValueTable {
 public:
  explicit ValueTable(TdParams params = {}) : params_(params) {}

  /// Appends a zero row to every drive's table.
  void add_row();
  std::size_t rows() const { return q_[0].size(); }
  const TdParams& params() const { return params_; }

  const ActionValues& row(Drive d, std::size_t p) const;
  double q(Drive d, std::size_t p, std::size_t a) const;
  void set(Drive d, std::size_t p, std::size_t a, double value);
  /// max_a Q_d(p, a)
  double value(Drive d, std::size_t p) const;

  void write(std::ostream& out) const;
  static ValueTable read(std::istream& in);

  friend bool operator==(const ValueTable&, const ValueTable&) = default;

 private:
  void check(std::size_t p, std::size_t a) const;

  TdParams params_;
  std::array<std::vector<ActionValues>, kDriveCount> q_;
};

/// Q-learning backup. `next` == nullopt marks a terminal transition (no bootstrap).
/// Throws Error(invalid_index) for out-of-range ids.
void td_update(ValueTable& table, Drive d, std::size_t p, std::size_t a, double r, std::optional<std::size_t> next);

// ---------------------------------------------------------------------------
// Action selection
// ---------------------------------------------------------------------------

struct EpsilonSchedule {
  double initial = 0.3;
  double minimum = 0.02;
  double decay = 0.9995;

  double at(std::uint64_t step) const;

  friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

/// epsilon-greedy over Q_d(p, .), greedy ties broken uniformly. Always draws one
/// uniform for the exploration test, plus one integer when exploring or tied.
std::size_t select_action(const ValueTable& table, Drive d, std::size_t p, double epsilon, Rng& rng);

/// n(p) / (n(p) + k)
double confidence(const PrototypeMap& map, std::size_t p, double k);

}  // namespace dac
