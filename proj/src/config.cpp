#include "dac/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "dac/error.hpp"
#include "dac/rng.hpp"
#include "dac/snapshot.hpp"

namespace dac {

namespace {

struct Field {
  std::string_view key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

[[noreturn]] void reject(std::string_view why) { throw Error(ErrorCode::config, std::string(why)); }

double to_double(std::string_view v) {
  double x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size()) reject("expected a number, got '" + std::string(v) + "'");
  return x;
}

std::uint64_t to_count(std::string_view v) {
  if (!v.empty() && v.front() == '-') reject("must be >= 0, got " + std::string(v));
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size()) reject("expected a non-negative integer, got '" + std::string(v) + "'");
  return x;
}

bool to_bool(std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  reject("expected true or false, got '" + std::string(v) + "'");
}

std::string of_bool(bool b) { return b ? "true" : "false"; }

ArchitectureProfile to_profile(std::string_view v) {
  if (auto p = parse_profile(v)) return *p;
  reject("unknown profile '" + std::string(v) + "'");
}

std::vector<std::pair<double, double>> to_positions(std::string_view v) {
  std::vector<std::pair<double, double>> out;
  if (v.empty() || v == "random") return out;
  while (!v.empty()) {
    auto semi = v.find(';');
    std::string_view item = v.substr(0, semi);
    auto comma = item.find(',');
    if (comma == std::string_view::npos) reject("expected x,y pairs separated by ';'");
    out.emplace_back(to_double(item.substr(0, comma)), to_double(item.substr(comma + 1)));
    v = semi == std::string_view::npos ? std::string_view{} : v.substr(semi + 1);
  }
  return out;
}

std::string of_positions(const std::vector<std::pair<double, double>>& ps) {
  if (ps.empty()) return "random";
  std::string s;
  for (const auto& [x, y] : ps) {
    if (!s.empty()) s += ';';
    s += format_double(x) + ',' + format_double(y);
  }
  return s;
}

#define DAC_REAL(name, expr) \
  Field { name, [](const RunConfig& c) { return format_double(c.expr); }, [](RunConfig& c, std::string_view v) { c.expr = to_double(v); } }
#define DAC_COUNT(name, expr)                                                                    \
  Field {                                                                                        \
    name, [](const RunConfig& c) { return std::to_string(c.expr); },                             \
        [](RunConfig& c, std::string_view v) { c.expr = static_cast<decltype(c.expr)>(to_count(v)); } \
  }
#define DAC_BOOL(name, expr) \
  Field { name, [](const RunConfig& c) { return of_bool(c.expr); }, [](RunConfig& c, std::string_view v) { c.expr = to_bool(v); } }

#define DAC_SPAWN(prefix, member)                                  \
  DAC_REAL(prefix ".spawn.x_min", scenario.member.x_min),          \
      DAC_REAL(prefix ".spawn.x_max", scenario.member.x_max),      \
      DAC_REAL(prefix ".spawn.y_min", scenario.member.y_min),      \
      DAC_REAL(prefix ".spawn.y_max", scenario.member.y_max),      \
      DAC_REAL(prefix ".spawn.heading", scenario.member.heading)

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      DAC_COUNT("run.seed", seed),
      DAC_BOOL("run.dump_trajectory", dump_trajectory),
      DAC_BOOL("run.dump_snapshots", dump_snapshots),

      DAC_COUNT("scenario.prey", scenario.prey),
      DAC_COUNT("scenario.predators", scenario.predators),
      DAC_COUNT("scenario.food", scenario.food),
      Field{"scenario.food_positions", [](const RunConfig& c) { return of_positions(c.scenario.food_positions); },
            [](RunConfig& c, std::string_view v) { c.scenario.food_positions = to_positions(v); }},
      DAC_BOOL("scenario.wolfpack", scenario.wolfpack),
      DAC_REAL("scenario.coop_radius", scenario.coop_radius),
      DAC_REAL("scenario.hit_damage", scenario.hit_damage),
      DAC_REAL("scenario.kill_energy", scenario.kill_energy),
      DAC_COUNT("scenario.epoch_length", scenario.epoch_length),
      DAC_COUNT("scenario.epochs", scenario.epochs),
      DAC_BOOL("scenario.freeze_prey", scenario.freeze_prey),
      DAC_BOOL("scenario.freeze_predators", scenario.freeze_predators),
      DAC_BOOL("scenario.relocate_on_eat", scenario.relocate_on_eat),

      Field{"prey.profile", [](const RunConfig& c) { return to_string(c.scenario.prey_profile); },
            [](RunConfig& c, std::string_view v) { c.scenario.prey_profile = to_profile(v); }},
      DAC_SPAWN("prey", prey_spawn),
      Field{"predator.profile", [](const RunConfig& c) { return to_string(c.scenario.predator_profile); },
            [](RunConfig& c, std::string_view v) { c.scenario.predator_profile = to_profile(v); }},
      DAC_SPAWN("predator", predator_spawn),

      DAC_REAL("world.width", scenario.world.width),
      DAC_REAL("world.height", scenario.world.height),
      DAC_REAL("world.odor_decay", scenario.world.odor_decay),
      DAC_REAL("world.antenna_angle", scenario.world.antenna_angle),
      DAC_REAL("world.antenna_offset", scenario.world.antenna_offset),
      DAC_COUNT("world.food_regen_steps", scenario.world.food_regen_steps),
      DAC_REAL("world.food_energy", scenario.world.food_energy),
      DAC_REAL("world.prey_radius", scenario.world.prey_radius),
      DAC_REAL("world.predator_radius", scenario.world.predator_radius),
      DAC_REAL("world.food_radius", scenario.world.food_radius),
      DAC_REAL("world.prey_max_speed", scenario.world.prey_motion.max_speed),
      DAC_REAL("world.prey_max_turn", scenario.world.prey_motion.max_turn),
      DAC_REAL("world.predator_max_speed", scenario.world.predator_motion.max_speed),
      DAC_REAL("world.predator_max_turn", scenario.world.predator_motion.max_turn),

      DAC_REAL("soma.base_cost", scenario.agent.soma.base_cost),
      DAC_REAL("soma.move_cost", scenario.agent.soma.move_cost),
      DAC_REAL("soma.heal_rate", scenario.agent.soma.heal_rate),
      DAC_REAL("soma.reward_weight_safety", scenario.agent.reward_weights[0]),
      DAC_REAL("soma.reward_weight_energy", scenario.agent.reward_weights[1]),

      DAC_REAL("reactive.priority_safety", scenario.agent.priorities[0]),
      DAC_REAL("reactive.priority_energy", scenario.agent.priorities[1]),
      DAC_REAL("reactive.noise_threshold", scenario.agent.reflex.noise_threshold),
      DAC_REAL("reactive.walk_turn_sd", scenario.agent.reflex.walk_turn_sd),
      DAC_REAL("reactive.approach_gain", scenario.agent.reflex.approach_gain),
      DAC_REAL("reactive.avoid_gain", scenario.agent.reflex.avoid_gain),
      DAC_REAL("reactive.panic_threshold", scenario.agent.panic_threshold),

      Field{"adaptive.features", [](const RunConfig& c) { return std::string(to_string(c.scenario.agent.features)); },
            [](RunConfig& c, std::string_view v) {
              auto m = parse_feature_mode(v);
              if (!m) reject("expected raw or bearing, got '" + std::string(v) + "'");
              c.scenario.agent.features = *m;
            }},
      DAC_REAL("adaptive.feature_floor", scenario.agent.feature_floor),
      DAC_REAL("adaptive.vigilance", scenario.agent.quantizer.vigilance),
      DAC_REAL("adaptive.quantizer_rate", scenario.agent.quantizer.rate),
      DAC_COUNT("adaptive.capacity", scenario.agent.quantizer.capacity),
      DAC_REAL("adaptive.alpha", scenario.agent.td.alpha),
      DAC_REAL("adaptive.gamma", scenario.agent.td.gamma),
      DAC_REAL("adaptive.epsilon_initial", scenario.agent.epsilon.initial),
      DAC_REAL("adaptive.epsilon_minimum", scenario.agent.epsilon.minimum),
      DAC_REAL("adaptive.epsilon_decay", scenario.agent.epsilon.decay),
      DAC_REAL("adaptive.confidence_k", scenario.agent.confidence_k),
      DAC_REAL("adaptive.confidence_gate", scenario.agent.confidence_gate),

      DAC_REAL("contextual.progress_weight", scenario.agent.goals.progress_weight),
      DAC_REAL("contextual.goal_exploration", scenario.agent.goals.exploration),
      DAC_COUNT("contextual.lp_window", scenario.agent.lp_window),
      DAC_REAL("contextual.step_cost", scenario.agent.planning.step_cost),
      DAC_COUNT("contextual.max_mismatches", scenario.agent.planning.max_mismatches),
      DAC_COUNT("contextual.goal_horizon", scenario.agent.goal_horizon),
      DAC_COUNT("contextual.memory_capacity", scenario.agent.memory_capacity),
  };
  return table;
}

#undef DAC_SPAWN
#undef DAC_BOOL
#undef DAC_COUNT
#undef DAC_REAL

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

void check_ranges(const RunConfig& c) {
  const auto& s = c.scenario;
  auto need = [](bool ok, std::string_view key, std::string_view why) {
    if (!ok) throw Error(ErrorCode::config, std::string(key) + ": " + std::string(why));
  };
  need(s.world.odor_decay > 0, "world.odor_decay", "must be positive");
  need(s.world.food_energy >= 0 && s.world.food_energy <= 1, "world.food_energy", "must be in [0, 1]");
  need(s.world.prey_radius > 0, "world.prey_radius", "must be positive");
  need(s.world.predator_radius > 0, "world.predator_radius", "must be positive");
  need(s.world.food_radius > 0, "world.food_radius", "must be positive");
  need(s.world.prey_motion.max_speed >= 0, "world.prey_max_speed", "must be >= 0");
  need(s.world.prey_motion.max_turn >= 0, "world.prey_max_turn", "must be >= 0");
  need(s.world.predator_motion.max_speed >= 0, "world.predator_max_speed", "must be >= 0");
  need(s.world.predator_motion.max_turn >= 0, "world.predator_max_turn", "must be >= 0");
  need(s.agent.soma.base_cost >= 0, "soma.base_cost", "must be >= 0");
  need(s.agent.soma.move_cost >= 0, "soma.move_cost", "must be >= 0");
  need(s.agent.soma.heal_rate >= 0, "soma.heal_rate", "must be >= 0");
  need(s.agent.reward_weights[0] >= 0, "soma.reward_weight_safety", "must be >= 0");
  need(s.agent.reward_weights[1] >= 0, "soma.reward_weight_energy", "must be >= 0");
  need(s.agent.priorities[0] >= 0, "reactive.priority_safety", "must be >= 0");
  need(s.agent.priorities[1] >= 0, "reactive.priority_energy", "must be >= 0");
  need(s.agent.reflex.noise_threshold >= 0, "reactive.noise_threshold", "must be >= 0");
  need(s.agent.reflex.walk_turn_sd >= 0, "reactive.walk_turn_sd", "must be >= 0");
  need(s.agent.feature_floor >= 0, "adaptive.feature_floor", "must be >= 0");
  need(s.agent.epsilon.initial >= 0 && s.agent.epsilon.initial <= 1, "adaptive.epsilon_initial", "must be in [0, 1]");
  need(s.agent.epsilon.minimum >= 0 && s.agent.epsilon.minimum <= 1, "adaptive.epsilon_minimum", "must be in [0, 1]");
  need(s.agent.epsilon.decay > 0 && s.agent.epsilon.decay <= 1, "adaptive.epsilon_decay", "must be in (0, 1]");
  need(s.agent.confidence_k > 0, "adaptive.confidence_k", "must be positive");
  need(s.agent.confidence_gate >= 0 && s.agent.confidence_gate <= 1, "adaptive.confidence_gate", "must be in [0, 1]");
  need(s.agent.goals.progress_weight >= 0, "contextual.progress_weight", "must be >= 0");
  need(s.agent.goals.exploration >= 0 && s.agent.goals.exploration <= 1, "contextual.goal_exploration",
       "must be in [0, 1]");
  need(s.agent.planning.step_cost > 0, "contextual.step_cost", "must be positive");
  s.validate();
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::set<std::string_view> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::config, where + "expected 'key = value'");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    const Field* field = nullptr;
    for (const auto& f : fields())
      if (f.key == key) field = &f;
    if (!field) throw Error(ErrorCode::config, where + std::string(key) + ": unknown key");
    if (!seen.insert(field->key).second) throw Error(ErrorCode::config, where + std::string(key) + ": repeated key");
    try {
      field->set(config, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::config, where + std::string(key) + ": " + e.what());
    }
  }
  check_ranges(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const RunConfig& config) {
  std::string out;
  std::string_view section;
  for (const auto& f : fields()) {
    std::string_view head = f.key.substr(0, f.key.find('.'));
    if (head != section) {
      if (!out.empty()) out += '\n';
      out += "# " + std::string(head) + "\n";
      section = head;
    }
    out += std::string(f.key) + " = " + f.get(config) + "\n";
  }
  return out;
}

std::uint64_t agent_seed(std::uint64_t master, std::uint64_t agent_id) {
  return derive_seed(master, stream::agent, agent_id);
}

}  // namespace dac
