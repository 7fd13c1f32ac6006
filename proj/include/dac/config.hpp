#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dac/ecology.hpp"

namespace dac {

/// Everything a run needs besides the seed and the output directory.
///
/// Text format: one `dotted.key = value` per line, `#` starts a comment, blank
/// lines are ignored. Omitted keys keep their defaults; unknown or repeated keys
/// are errors. Booleans are `true`/`false`, food positions `x,y;x,y;...`.
struct RunConfig {
  ScenarioConfig scenario;
  std::uint64_t seed = 1;
  bool dump_trajectory = false;
  bool dump_snapshots = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws Error(config) with "line N: key: reason".
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its current value, in documentation order. parse_config() of
/// the result reproduces `config`.
std::string emit_config(const RunConfig& config);

/// Per-agent stream root, hash(master seed, agent id).
std::uint64_t agent_seed(std::uint64_t master, std::uint64_t agent_id);

}  // namespace dac
