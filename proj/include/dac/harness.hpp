#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dac/config.hpp"
#include "dac/ecology.hpp"

namespace dac {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

struct FileRecord {
  std::string name;  // relative to the run directory
  std::uint64_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string config_hash;  // sha256 of emit_config()
  std::string version{kArtifactVersion};
  std::uint64_t seed = 0;
  std::uint64_t start_step = 0;
  std::uint64_t end_step = 0;
  std::vector<FileRecord> files;

  std::string to_json() const;
};

struct RunOptions {
  bool overwrite = false;
};

/// Runs K epochs into `out`. Everything is written to a sibling staging directory
/// first and renamed into place at the end. An existing `out` is an error unless
/// `overwrite` is set. Files: metrics.jsonl, manifest.json, and when requested
/// trajectory.csv, events.csv and snapshots/agent_<id>.txt.
RunManifest run(const RunConfig& config, const std::filesystem::path& out, const RunOptions& options = {});

/// Same simulation without touching the file system.
std::vector<EpochMetrics> run_metrics(const RunConfig& config);

struct AblationRow {
  std::string profile;
  std::uint64_t seed = 0;
  std::uint64_t epochs = 0;
  double prey_energy_intake = 0.0;        // per prey per 1000 steps, mean over all epochs
  double prey_energy_intake_final = 0.0;  // same over the final quarter of epochs (at least one)
  double mean_prey_lifetime = 0.0;
  double captures_per_predator_per_1000 = 0.0;
  double prey_prototypes = 0.0;           // at the last epoch
};

struct AblationTable {
  std::vector<AblationRow> rows;   // profile-major, seeds ascending
  std::vector<AblationRow> means;  // one per profile, seed = number of seeds

  std::string to_csv() const;
};

/// Summary of one run's metrics, the aggregation the ablation table uses.
AblationRow summarize(const std::string& profile, std::uint64_t seed, const std::vector<EpochMetrics>& metrics);

/// Cross product of profiles (applied to both populations) and the seeds
/// base.seed .. base.seed + seeds - 1. Each run lands in out/<PROFILE>/seed_<n>/, the table
/// in out/ablation.csv.
AblationTable ablate(const RunConfig& base, const std::vector<std::string>& profiles, std::uint64_t seeds,
                     const std::filesystem::path& out, const RunOptions& options = {});

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

std::vector<EpochMetrics> read_metrics(const std::filesystem::path& path);

}  // namespace dac
