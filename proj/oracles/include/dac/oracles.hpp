#pragma once

// Independent reference computations used by `dacsim verify` and the test suites.
// Nothing in the simulator links against this library.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dac/contextual.hpp"
#include "dac/ecology.hpp"

namespace dac::oracle {

// --- small MDP --------------------------------------------------------------

/// Deterministic MDP with 3 states and 2 actions: next[s][a], reward[s][a].
struct SmallMdp {
  std::size_t next[3][2];
  double reward[3][2];
};
SmallMdp builtin_mdp();

/// Q* by value iteration to a fixed point.
std::vector<std::array<double, 2>> value_iteration(const SmallMdp& mdp, double gamma);

/// Q from repeated td_update sweeps over every (s, a) with the given gamma.
std::vector<std::array<double, 2>> td_fixed_point(const SmallMdp& mdp, double alpha, double gamma,
                                                  std::size_t sweeps);

// --- shortest paths ---------------------------------------------------------

/// Bellman-Ford on edge_cost over counted edges; nullopt when unreachable.
std::optional<double> reference_cost(const TransitionGraph& g, std::size_t from, std::size_t to, double step_cost);
/// Minimum over every simple path, by depth-first enumeration.
std::optional<double> exhaustive_cost(const TransitionGraph& g, std::size_t from, std::size_t to, double step_cost);
TransitionGraph random_graph(std::size_t nodes, double density, std::uint64_t seed);

// --- learning progress ------------------------------------------------------

/// LP recomputed from the full outcome history by folding the last 2W entries.
double learning_progress_fold(const std::vector<bool>& history, std::size_t window);

// --- capture geometry -------------------------------------------------------

/// Prey ids that a brute-force neighbourhood check says take damage.
std::vector<EntityId> brute_force_damaged(const World& world, bool wolfpack, double coop_radius);

// --- statistics -------------------------------------------------------------

double reference_pearson(const std::vector<double>& x, const std::vector<double>& y);

/// One-sided p-value for mean(diff) > 0 by bootstrap resampling of paired
/// differences: fraction of resampled means <= 0.
double bootstrap_p_greater(const std::vector<double>& diffs, std::size_t resamples, std::uint64_t seed);
/// One-sided p for statistic(a) > statistic(b), independent samples, statistic = median.
double bootstrap_p_median_greater(const std::vector<double>& a, const std::vector<double>& b,
                                  std::size_t resamples, std::uint64_t seed);
double median(std::vector<double> x);

// --- suites -----------------------------------------------------------------

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  double mdp_gamma_perturbation = 0.0;  // nonzero makes the MDP suite disagree with its oracle
};

std::vector<SuiteResult> run_suites(const VerifyOptions& options = {});
/// One JSON document with suites in fixed order and keys name, pass, detail.
std::string report_json(const std::vector<SuiteResult>& results);

// individual suites, exposed for the acceptance binary
SuiteResult suite_mdp(double gamma_perturbation = 0.0);
SuiteResult suite_shortest_path();
SuiteResult suite_lp_window();
SuiteResult suite_geometry_capture();
SuiteResult suite_determinism();
SuiteResult suite_quantizer_vigilance();
SuiteResult suite_q_bounded();
SuiteResult suite_graph_normalization();
SuiteResult suite_freeze();
SuiteResult suite_profile_reduction();

}  // namespace dac::oracle
