#include "dac/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dac/error.hpp"
#include "dac/snapshot.hpp"

namespace dac {

std::string_view to_string(FeatureMode mode) { return mode == FeatureMode::raw ? "raw" : "bearing"; }

std::optional<FeatureMode> parse_feature_mode(std::string_view text) {
  if (text == "raw") return FeatureMode::raw;
  if (text == "bearing") return FeatureMode::bearing;
  return std::nullopt;
}

FeatureVector percept_features(const Percept& percept, FeatureMode mode, const WorldParams& world,
                               double noise_threshold) {
  if (mode == FeatureMode::raw) return percept.flatten();

  // |ln(L/R)| <= separation / lambda for any set of emitters.
  const double separation = 2.0 * world.antenna_offset * std::sin(world.antenna_angle);
  const double scale = separation > 0.0 ? world.odor_decay / separation : 0.0;
  FeatureVector f{};
  for (std::size_t c = 0; c < kOdorCount; ++c) {
    const BilateralSample& s = percept.odor[c];
    f[2 * c] = 0.5 * (s.left + s.right);
    double contrast = 0.0;
    if (std::max(s.left, s.right) >= noise_threshold && s.left > 0.0 && s.right > 0.0)
      contrast = std::clamp(scale * std::log(s.left / s.right), -1.0, 1.0);
    f[2 * c + 1] = contrast;
  }
  return f;
}

PrototypeMap::PrototypeMap(std::size_t dim, QuantizerParams params) : dim_(dim), params_(params) {}

std::span<const double> PrototypeMap::centroid(std::size_t id) const {
  if (id >= size()) throw Error(ErrorCode::invalid_index, "prototype id out of range");
  return {centroids_.data() + id * dim_, dim_};
}

std::optional<Assignment> PrototypeMap::nearest(std::span<const double> x) const {
  if (x.size() != dim_) throw Error(ErrorCode::dimension_mismatch, "feature dimension mismatch");
  if (size() == 0) return std::nullopt;
  std::size_t best = 0;
  double best_sq = INFINITY;
  for (std::size_t i = 0; i < size(); ++i) {
    const double* c = centroids_.data() + i * dim_;
    double sq = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = x[k] - c[k];
      sq += d * d;
    }
    if (sq < best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  return Assignment{best, false, std::sqrt(best_sq)};
}

Assignment PrototypeMap::quantize(std::span<const double> x) {
  auto winner = nearest(x);
  if (!winner || (winner->distance > params_.vigilance && size() < params_.capacity)) {
    centroids_.insert(centroids_.end(), x.begin(), x.end());
    visits_.push_back(1);
    return {size() - 1, true, 0.0};
  }
  double* c = centroids_.data() + winner->id * dim_;
  for (std::size_t k = 0; k < dim_; ++k) c[k] += params_.rate * (x[k] - c[k]);
  ++visits_[winner->id];
  return *winner;
}

void PrototypeMap::write(std::ostream& out) const {
  SnapshotWriter w(out);
  w.put("prototypes.dim", static_cast<std::uint64_t>(dim_));
  w.put("prototypes.vigilance", params_.vigilance);
  w.put("prototypes.rate", params_.rate);
  w.put("prototypes.capacity", static_cast<std::uint64_t>(params_.capacity));
  w.put("prototypes.count", static_cast<std::uint64_t>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    w.put("prototype.visits", visits_[i]);
    w.put("prototype.centroid", centroid(i));
  }
}

PrototypeMap PrototypeMap::read(std::istream& in) {
  SnapshotReader r(in);
  const auto dim = static_cast<std::size_t>(r.expect_u64("prototypes.dim"));
  QuantizerParams params;
  params.vigilance = r.expect_double("prototypes.vigilance");
  params.rate = r.expect_double("prototypes.rate");
  params.capacity = static_cast<std::size_t>(r.expect_u64("prototypes.capacity"));
  PrototypeMap map(dim, params);
  const auto count = r.expect_u64("prototypes.count");
  for (std::uint64_t i = 0; i < count; ++i) {
    map.visits_.push_back(r.expect_u64("prototype.visits"));
    const auto c = r.expect_doubles("prototype.centroid", dim);
    map.centroids_.insert(map.centroids_.end(), c.begin(), c.end());
  }
  return map;
}

void ValueTable::add_row() {
  for (auto& table : q_) table.push_back(ActionValues{});
}

void ValueTable::check(std::size_t p, std::size_t a) const {
  if (p >= rows() || a >= kActionCount) throw Error(ErrorCode::invalid_index, "value table index out of range");
}

const ActionValues& ValueTable::row(Drive d, std::size_t p) const {
  check(p, 0);
  return q_[index_of(d)][p];
}

double ValueTable::q(Drive d, std::size_t p, std::size_t a) const {
  check(p, a);
  return q_[index_of(d)][p][a];
}

void ValueTable::set(Drive d, std::size_t p, std::size_t a, double value) {
  check(p, a);
  q_[index_of(d)][p][a] = value;
}

double ValueTable::value(Drive d, std::size_t p) const {
  const ActionValues& r = row(d, p);
  return *std::max_element(r.begin(), r.end());
}

void ValueTable::write(std::ostream& out) const {
  SnapshotWriter w(out);
  w.put("values.alpha", params_.alpha);
  w.put("values.gamma", params_.gamma);
  w.put("values.rows", static_cast<std::uint64_t>(rows()));
  for (Drive d : kDrives) {
    const std::string key = "q." + std::string(to_string(d));
    for (const ActionValues& r : q_[index_of(d)]) w.put(key, std::span<const double>(r));
  }
}

ValueTable ValueTable::read(std::istream& in) {
  SnapshotReader r(in);
  TdParams params;
  params.alpha = r.expect_double("values.alpha");
  params.gamma = r.expect_double("values.gamma");
  ValueTable table(params);
  const auto rows = r.expect_u64("values.rows");
  for (Drive d : kDrives) {
    const std::string key = "q." + std::string(to_string(d));
    for (std::uint64_t i = 0; i < rows; ++i) {
      const auto v = r.expect_doubles(key, kActionCount);
      ActionValues row{};
      std::copy(v.begin(), v.end(), row.begin());
      table.q_[index_of(d)].push_back(row);
    }
  }
  return table;
}

void td_update(ValueTable& table, Drive d, std::size_t p, std::size_t a, double r, std::optional<std::size_t> next) {
  const double current = table.q(d, p, a);
  double target = r;
  if (next) {
    if (*next >= table.rows()) throw Error(ErrorCode::invalid_index, "next prototype out of range");
    target += table.params().gamma * table.value(d, *next);
  }
  table.set(d, p, a, current + table.params().alpha * (target - current));
}

double EpsilonSchedule::at(std::uint64_t step) const {
  return std::clamp(std::max(minimum, initial * std::pow(decay, static_cast<double>(step))), 0.0, 1.0);
}

std::size_t select_action(const ValueTable& table, Drive d, std::size_t p, double epsilon, Rng& rng) {
  const ActionValues& q = table.row(d, p);
  if (rng.uniform() < epsilon) return rng.below(kActionCount);
  const double best = *std::max_element(q.begin(), q.end());
  std::array<std::size_t, kActionCount> ties{};
  std::size_t n = 0;
  for (std::size_t a = 0; a < kActionCount; ++a)
    if (q[a] == best) ties[n++] = a;
  return n == 1 ? ties[0] : ties[rng.below(n)];
}

double confidence(const PrototypeMap& map, std::size_t p, double k) {
  const double n = static_cast<double>(map.visits(p));
  return n / (n + k);
}

}  // namespace dac
