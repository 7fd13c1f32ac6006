#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace dac {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for the stream identified by (master, tag). Every random decision in
/// the simulator draws from a stream created this way.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag_a, std::uint64_t tag_b);

// Subsystem tags mixed into derive_seed.
namespace stream {
inline constexpr std::uint64_t world = 0x776f726c64ULL;
inline constexpr std::uint64_t agent = 0x6167656e74ULL;
inline constexpr std::uint64_t reflex = 1;
inline constexpr std::uint64_t adaptive = 2;
inline constexpr std::uint64_t contextual = 3;
inline constexpr std::uint64_t bootstrap = 0x626f6f74ULL;
}  // namespace stream

/// Deterministic random stream. The engine is mt19937_64, whose output sequence
/// is fixed by the standard; the conversions below are implemented here rather
/// than through <random> distributions, which vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (no cached second variate).
  double normal(double mean = 0.0, double sd = 1.0);

  std::string serialize() const;
  void deserialize(const std::string& text);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dac
