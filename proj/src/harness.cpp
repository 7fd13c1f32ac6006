#include "dac/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "dac/error.hpp"
#include "dac/snapshot.hpp"

namespace dac {

namespace fs = std::filesystem;

namespace {

std::string hex(const unsigned char* data, unsigned len) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    s += digits[data[i] >> 4];
    s += digits[data[i] & 0xf];
  }
  return s;
}

struct Sha256 {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};
  Sha256() {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error(ErrorCode::io, "sha256 init failed");
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx.get(), data, n); }
  std::string finish() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    return hex(md.data(), len);
  }
};

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

fs::path staging_path(const fs::path& out) {
  fs::path p = out;
  p += ".staging";
  return p;
}

void claim(const fs::path& out, const RunOptions& options) {
  if (fs::exists(out) && !options.overwrite)
    throw Error(ErrorCode::io, "output directory exists: " + out.string() + " (use --overwrite)");
}

void publish(const fs::path& staging, const fs::path& out) {
  if (fs::exists(out)) fs::remove_all(out);
  fs::rename(staging, out);
}

Simulation make_simulation(const RunConfig& config) { return Simulation(config.scenario, config.seed); }

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.finish();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.finish();
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["seed"] = seed;
  j["start_step"] = start_step;
  j["end_step"] = end_step;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files) j["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  return j.dump(2) + "\n";
}

std::vector<EpochMetrics> run_metrics(const RunConfig& config) {
  Simulation sim = make_simulation(config);
  std::vector<EpochMetrics> out;
  for (std::size_t k = 0; k < config.scenario.epochs; ++k) out.push_back(sim.run_epoch());
  return out;
}

RunManifest run(const RunConfig& config, const fs::path& out, const RunOptions& options) {
  claim(out, options);
  const fs::path staging = staging_path(out);
  if (fs::exists(staging)) fs::remove_all(staging);
  fs::create_directories(staging);

  RunManifest manifest;
  const std::string text = emit_config(config);
  manifest.config_hash = sha256_hex(text);
  manifest.seed = config.seed;

  try {
    write_file(staging / "config.txt", text);
    Simulation sim = make_simulation(config);
    manifest.start_step = sim.world().step_count();

    std::ofstream trajectory, events;
    if (config.dump_trajectory) {
      trajectory = open_out(staging / "trajectory.csv");
      events = open_out(staging / "events.csv");
      trajectory << kTrajectoryHeader << '\n';
      events << kEventHeader << '\n';
      sim.set_trajectory_sink(&trajectory);
      sim.set_event_sink(&events);
    }
    {
      std::ofstream metrics = open_out(staging / "metrics.jsonl");
      for (std::size_t k = 0; k < config.scenario.epochs; ++k) metrics << to_json_line(sim.run_epoch()) << '\n';
      if (!metrics) throw Error(ErrorCode::io, "metrics write failed");
    }
    sim.set_trajectory_sink(nullptr);
    sim.set_event_sink(nullptr);
    trajectory.close();
    events.close();
    manifest.end_step = sim.world().step_count();

    if (config.dump_snapshots) {
      fs::create_directories(staging / "snapshots");
      for (const auto& a : sim.agents())
        write_file(staging / "snapshots" / ("agent_" + std::to_string(a.id()) + ".txt"), a.snapshot());
    }

    std::vector<fs::path> emitted;
    for (const auto& e : fs::recursive_directory_iterator(staging))
      if (e.is_regular_file()) emitted.push_back(fs::relative(e.path(), staging));
    std::sort(emitted.begin(), emitted.end());
    for (const auto& rel : emitted)
      manifest.files.push_back({rel.generic_string(), fs::file_size(staging / rel), sha256_file(staging / rel)});
    write_file(staging / "manifest.json", manifest.to_json());
    publish(staging, out);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  return manifest;
}

std::vector<EpochMetrics> read_metrics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::vector<EpochMetrics> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(epoch_metrics_from_json(line));
  return out;
}

AblationRow summarize(const std::string& profile, std::uint64_t seed, const std::vector<EpochMetrics>& metrics) {
  AblationRow r;
  r.profile = profile;
  r.seed = seed;
  r.epochs = metrics.size();
  if (metrics.empty()) return r;
  const std::size_t n = metrics.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 4);
  for (std::size_t k = 0; k < n; ++k) {
    r.prey_energy_intake += metrics[k].prey_energy_intake;
    r.mean_prey_lifetime += metrics[k].mean_prey_lifetime;
    r.captures_per_predator_per_1000 += metrics[k].capture_rate();
    if (k >= n - tail) r.prey_energy_intake_final += metrics[k].prey_energy_intake;
  }
  const double dn = static_cast<double>(n);
  r.prey_energy_intake /= dn;
  r.mean_prey_lifetime /= dn;
  r.captures_per_predator_per_1000 /= dn;
  r.prey_energy_intake_final /= static_cast<double>(tail);
  r.prey_prototypes = metrics.back().prey_prototypes;
  return r;
}

std::string AblationTable::to_csv() const {
  std::ostringstream out;
  out << "profile,seed,epochs,prey_energy_intake,prey_energy_intake_final,mean_prey_lifetime,"
         "captures_per_predator_per_1000,prey_prototypes\n";
  auto row = [&](const AblationRow& r, std::string_view seed) {
    out << r.profile << ',' << seed << ',' << r.epochs << ',' << format_double(r.prey_energy_intake) << ','
        << format_double(r.prey_energy_intake_final) << ',' << format_double(r.mean_prey_lifetime) << ','
        << format_double(r.captures_per_predator_per_1000) << ',' << format_double(r.prey_prototypes) << '\n';
  };
  for (const auto& r : rows) row(r, std::to_string(r.seed));
  for (const auto& r : means) row(r, "mean");
  return out.str();
}

AblationTable ablate(const RunConfig& base, const std::vector<std::string>& profiles, std::uint64_t seeds,
                     const fs::path& out, const RunOptions& options) {
  if (profiles.empty()) throw Error(ErrorCode::config, "ablate: no profiles");
  if (seeds == 0) throw Error(ErrorCode::config, "ablate: no seeds");
  std::vector<ArchitectureProfile> parsed;
  for (const auto& name : profiles) {
    auto p = parse_profile(name);
    if (!p) throw Error(ErrorCode::config, "ablate: unknown profile " + name);
    parsed.push_back(*p);
  }
  claim(out, options);
  const fs::path staging = staging_path(out);
  if (fs::exists(staging)) fs::remove_all(staging);
  fs::create_directories(staging);

  AblationTable table;
  try {
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      AblationRow mean;
      mean.profile = profiles[i];
      mean.seed = seeds;
      for (std::uint64_t s = 0; s < seeds; ++s) {
        RunConfig c = base;
        c.seed = base.seed + s;
        c.scenario.prey_profile = parsed[i];
        c.scenario.predator_profile = parsed[i];
        const fs::path dir = staging / profiles[i] / ("seed_" + std::to_string(c.seed));
        fs::create_directories(dir.parent_path());
        run(c, dir, {});
        AblationRow r = summarize(profiles[i], c.seed, read_metrics(dir / "metrics.jsonl"));
        mean.epochs = r.epochs;
        mean.prey_energy_intake += r.prey_energy_intake;
        mean.prey_energy_intake_final += r.prey_energy_intake_final;
        mean.mean_prey_lifetime += r.mean_prey_lifetime;
        mean.captures_per_predator_per_1000 += r.captures_per_predator_per_1000;
        mean.prey_prototypes += r.prey_prototypes;
        table.rows.push_back(std::move(r));
      }
      const double n = static_cast<double>(seeds);
      mean.prey_energy_intake /= n;
      mean.prey_energy_intake_final /= n;
      mean.mean_prey_lifetime /= n;
      mean.captures_per_predator_per_1000 /= n;
      mean.prey_prototypes /= n;
      table.means.push_back(mean);
    }
    write_file(staging / "ablation.csv", table.to_csv());
    publish(staging, out);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  return table;
}

}  // namespace dac
