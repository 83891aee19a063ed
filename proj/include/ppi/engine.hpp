#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "ppi/network.hpp"
#include "ppi/profile.hpp"
#include "ppi/rng.hpp"

namespace ppi {

/// Inputs of one simulation of the resource-allocation game.
struct SimulationConfig {
  Eigen::VectorXd initial;        // indicator levels at period 0, in [0,1]
  Eigen::VectorXd targets;        // target levels, in [0,1]
  SpilloverNetwork network;
  double gamma = 0.5;             // policy quality: step size toward targets
  double budget = 1.0;            // per-period transformative budget, in (0,1]
  double beta = 1.0;              // scaling of incoming spillovers
  double epsilon = 1e-2;          // convergence tolerance on positive gaps
  int max_periods = 10000;
  std::uint64_t seed = 0;
  int rule_of_law_node = 0;
  int control_of_corruption_node = 1;

  int size() const { return static_cast<int>(initial.size()); }
  void validate() const;

  nlohmann::json to_json() const;
  static SimulationConfig from_json(const nlohmann::json& doc);
};

/// Per-period record of one run plus its summary statistics.
///
/// Period arrays hold the state after each executed period; a simulation
/// that starts converged executes no periods and leaves them empty.
struct SimulationTrace {
  std::vector<Eigen::VectorXd> indicators;     // levels after each period
  std::vector<Eigen::VectorXd> allocations;
  std::vector<Eigen::VectorXd> contributions;
  std::vector<std::vector<std::uint8_t>> supervision;
  int periods = 0;                // number of executed periods (ell)
  bool converged = false;
  double total_diversion = 0.0;   // sum of (P - C) over nodes and periods,
                                  // normalized by N * budget

  nlohmann::json to_json() const;
};

/// Maps a governance indicator level in [0,1] to a probability-like value
/// level / exp(1 - level); increasing, 0 at 0 and 1 at 1.
double governance_map(double level);

/// Budget split for one period. Propensities are
/// max(0, gap) * (degree + 1) * (1 - supervised * f_rule_of_law), normalized
/// to shares; an all-zero propensity vector falls back to a uniform split
/// over nodes with positive gaps, or over all nodes if there are none.
/// Returns shares scaled by the budget, so the result sums to the budget.
Eigen::VectorXd allocate(const Eigen::VectorXd& gaps,
                         const std::vector<int>& degrees,
                         const std::vector<std::uint8_t>& supervised,
                         double f_rule_of_law, double budget);

/// Bernoulli supervision outcomes: node i is caught with probability
/// f_control_of_corruption * (P_i - C_i) / sum_j (P_j - C_j); all
/// probabilities are 0 when nothing is diverted. Always consumes exactly
/// one uniform draw per node.
std::vector<std::uint8_t> sample_supervision(const Eigen::VectorXd& allocations,
                                             const Eigen::VectorXd& contributions,
                                             double f_control_of_corruption,
                                             Rng& rng);

/// Benefit of the official in charge of one policy issue.
double benefit(double indicator, double allocation, double contribution,
               bool caught, double f_rule_of_law);

/// Two periods of per-node history needed by the contribution update.
struct ContributionHistory {
  double contribution_prev = 0.0;
  double contribution_prev2 = 0.0;
  double benefit_prev = 0.0;
  double benefit_prev2 = 0.0;
};

/// Adaptive contribution rule: move by |benefit change| times the mean of
/// the two lagged contributions, in the direction that previously paid off,
/// clamped to [0, allocation].
double update_contribution(const ContributionHistory& history, double allocation);

/// One propagation step of all indicators given current contributions and
/// incoming spillovers; levels never move once their target is met and are
/// clamped to [0,1].
Eigen::VectorXd step_indicators(const Eigen::VectorXd& levels,
                                const Eigen::VectorXd& contributions,
                                const SimulationConfig& config);

/// Full run of the game until every positive gap is within epsilon or the
/// period cap is hit. Deterministic given (config, seed).
///
/// Random draw order (fixed so traces are reproducible): two bootstrap
/// contribution draws of N uniforms each, then N uniforms per executed
/// period for supervision.
SimulationTrace run_simulation(const SimulationConfig& config);

/// Monte Carlo allocation profiles: per run, the time average of the
/// normalized per-period allocations; `mean` averages across runs. Run
/// seeds derive deterministically from the master seed.
struct ProfileSamples {
  AllocationProfile mean;
  std::vector<AllocationProfile> runs;
};

ProfileSamples expected_profile(const SimulationConfig& config, int n_runs,
                                std::uint64_t master_seed);

}  // namespace ppi
