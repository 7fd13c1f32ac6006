// dacsim: command-line front end for the simulator.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dac/config.hpp"
#include "dac/error.hpp"
#include "dac/harness.hpp"
#include "dac/oracles.hpp"

namespace {

int fail(std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return 1;
}

std::vector<std::string> split(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

dac::RunConfig config_from(const std::string& path) {
  return path.empty() ? dac::parse_config("") : dac::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embodied multi-agent simulator with layered control"};
  app.require_subcommand(1);

  std::string config_path, out_dir, freeze, profiles, metrics_path;
  std::optional<std::uint64_t> seed;
  std::uint64_t seeds = 1;
  bool dump = false, snapshots = false, overwrite = false;
  double perturb = 0.0;

  auto* simulate = app.add_subcommand("simulate", "run one scenario");
  simulate->add_option("--config", config_path, "config file (defaults when omitted)");
  simulate->add_option("--seed", seed, "master seed (overrides run.seed)");
  simulate->add_option("--out", out_dir, "output directory")->required();
  simulate->add_flag("--dump-trajectory", dump, "write trajectory.csv and events.csv");
  simulate->add_flag("--dump-snapshots", snapshots, "write learner snapshots at the end");
  simulate->add_option("--freeze", freeze, "prey, predators or both")
      ->check(CLI::IsMember({"prey", "predators", "both"}));
  simulate->add_flag("--overwrite", overwrite, "replace an existing output directory");

  auto* abl = app.add_subcommand("ablate", "profile x seed comparison table");
  abl->add_option("--config", config_path, "base config file");
  abl->add_option("--profiles", profiles, "comma-separated preset names")->required();
  abl->add_option("--seeds", seeds, "number of seeds")->check(CLI::PositiveNumber);
  abl->add_option("--seed", seed, "first seed (overrides run.seed)");
  abl->add_option("--out", out_dir, "output directory")->required();
  abl->add_flag("--overwrite", overwrite, "replace an existing output directory");

  auto* coadapt = app.add_subcommand("coadapt", "co-adaptation report from a metrics file");
  coadapt->add_option("--metrics", metrics_path, "metrics.jsonl")->required();
  coadapt->add_option("--out", out_dir, "report file");

  auto* verify = app.add_subcommand("verify", "run the oracle suites");
  verify->add_option("--perturb-gamma", perturb, "offset the discount in the MDP suite (negative control)");

  std::string graph_path;
  std::size_t from = 0, to = 0;
  double step_cost = dac::PlanParams{}.step_cost;
  auto* plan = app.add_subcommand("plan", "plan over a hand-authored transition graph");
  plan->add_option("--graph", graph_path, "edge list: `# nodes N`, then `p a next count` per line")->required();
  plan->add_option("--from", from, "start prototype")->required();
  plan->add_option("--to", to, "goal prototype")->required();
  plan->add_option("--step-cost", step_cost, "added to -ln p for every edge");

  auto* defaults = app.add_subcommand("defaults", "print every config key with its default");
  defaults->add_option("--config", config_path, "print this config with defaults filled in instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what());
  }

  try {
    if (*simulate) {
      dac::RunConfig c = config_from(config_path);
      if (seed) c.seed = *seed;
      c.dump_trajectory = c.dump_trajectory || dump;
      c.dump_snapshots = c.dump_snapshots || snapshots;
      if (freeze == "prey" || freeze == "both") c.scenario.freeze_prey = true;
      if (freeze == "predators" || freeze == "both") c.scenario.freeze_predators = true;
      const auto m = dac::run(c, out_dir, {overwrite});
      std::cout << m.to_json();
    } else if (*abl) {
      dac::RunConfig c = config_from(config_path);
      if (seed) c.seed = *seed;
      const auto table = dac::ablate(c, split(profiles), seeds, out_dir, {overwrite});
      std::cout << table.to_csv();
    } else if (*coadapt) {
      const auto metrics = dac::read_metrics(metrics_path);
      const std::string report = dac::to_json(dac::coadaptation(metrics)) + "\n";
      if (out_dir.empty()) {
        std::cout << report;
      } else {
        std::ofstream out(out_dir, std::ios::binary);
        out << report;
        if (!out) return fail("io", "cannot write " + out_dir);
      }
    } else if (*verify) {
      const auto results = dac::oracle::run_suites({perturb});
      std::cout << dac::oracle::report_json(results);
      for (const auto& r : results)
        if (!r.pass) return 2;
    } else if (*plan) {
      std::ifstream in(graph_path);
      if (!in) return fail("io", "cannot read " + graph_path);
      const auto graph = dac::TransitionGraph::read_edges(in);
      if (from >= graph.nodes() || to >= graph.nodes()) return fail("invalid_index", "prototype id out of range");
      const auto p = dac::plan(graph, from, to, {step_cost, dac::PlanParams{}.max_mismatches});
      nlohmann::ordered_json j;
      j["from"] = from;
      j["to"] = to;
      j["reachable"] = p.has_value();
      if (p) {
        j["cost"] = p->cost;
        j["steps"] = nlohmann::ordered_json::array();
        for (const auto& s : p->steps) j["steps"].push_back({{"action", s.action}, {"expected", s.expected}});
      }
      std::cout << j.dump() << '\n';
    } else if (*defaults) {
      std::cout << dac::emit_config(config_from(config_path));
    }
  } catch (const dac::Error& e) {
    return fail(dac::to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
