#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppi/engine.hpp"
#include "ppi/panel.hpp"

namespace ppi {

/// Mean of the direction-adjusted diversion-of-funds indicator, flipped so
/// that larger values mean more corruption.
double empirical_corruption(const IndicatorPanel& panel,
                            const std::string& country);

/// Monte Carlo mean of the normalized accumulated diversion of a config.
double simulated_corruption(const SimulationConfig& config, int n_runs,
                            std::uint64_t seed);

/// Simulation inputs of one country over the sample window: first-year
/// levels as the start, last-year levels as the targets, the country's
/// budget fraction and governance roles.
SimulationConfig config_for_country(const IndicatorPanel& panel,
                                    const SpilloverNetwork& network,
                                    const std::string& country, double gamma);

struct CalibrationOptions {
  int k_max = 8;
  int n_runs = 100;
  std::uint64_t seed = 0;
  double gamma_lo = 1e-3;
  double gamma_hi = 2.0;
  double penalty_weight = 1.0;   // times k * log(#countries)
  double search_tol = 1e-3;      // golden-section interval width
  int max_periods = 2000;        // per-simulation cap during fitting
};

struct CalibrationResult {
  std::map<std::string, double> gamma;
  std::vector<std::vector<std::string>> clusters;  // corruption-ordered segments
  double loss = 0.0;                               // unpenalized, at selected k
  std::map<std::string, double> empirical;
  std::map<std::string, double> simulated;         // at the fitted gamma
  std::vector<double> loss_by_k;                   // unpenalized, k = 1..k_max

  nlohmann::json to_json() const;
  static CalibrationResult from_json(const nlohmann::json& doc);
};

/// Fits one policy-quality value per country cluster by matching simulated
/// to empirical corruption. Countries are ordered by empirical corruption
/// and split into contiguous segments; segments are refined greedily so
/// candidate partitions nest, and the cluster count is chosen by penalized
/// loss. Deterministic given (panel, options).
CalibrationResult fit_gamma(const IndicatorPanel& panel,
                            const std::map<std::string, SpilloverNetwork>& networks,
                            const std::vector<std::string>& countries,
                            const CalibrationOptions& options);

void save_calibration(const CalibrationResult& result, const std::string& path);
CalibrationResult load_calibration(const std::string& path);

}  // namespace ppi
