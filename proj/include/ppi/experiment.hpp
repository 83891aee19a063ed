#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppi/calibration.hpp"
#include "ppi/coherence.hpp"
#include "ppi/network.hpp"
#include "ppi/panel.hpp"

namespace ppi {

/// Batch description of a country x mode coherence experiment.
struct ExperimentSpec {
  std::string panel_path;          // csv, with meta_path; or canonical json
  std::string meta_path;
  std::vector<std::string> countries;
  std::vector<std::string> modes;  // "early" expands to the panel's early members
  int runs = 200;
  std::uint64_t seed = 0;
  std::string metric = "l1";
  std::optional<std::string> calibration_path;  // exclusive with fixed_gamma
  std::optional<double> fixed_gamma;
  std::string out_dir;

  static ExperimentSpec from_json(const nlohmann::json& doc);
  static ExperimentSpec load(const std::string& path);
  nlohmann::json to_json() const;
};

struct GridCell {
  std::string country;
  std::string mode;
  CoherenceResult result;
  std::vector<double> mean_retrospective;
  std::vector<double> mean_consistent;

  nlohmann::json to_json() const;
  static GridCell from_json(const nlohmann::json& doc);
};

/// Completed mode x country matrix of coherence results.
struct CoherenceGrid {
  std::vector<std::string> countries;
  std::vector<std::string> modes;
  std::map<std::pair<std::string, std::string>, GridCell> cells;  // (country, mode)

  const GridCell& cell(const std::string& country, const std::string& mode) const;
  bool has_cell(const std::string& country, const std::string& mode) const;

  /// Mode with the highest index per country; ties go to the earlier mode.
  std::map<std::string, std::string> best_mode_per_country() const;
  /// Arithmetic mean of present cells per mode.
  std::map<std::string, double> average_h_per_mode() const;

  nlohmann::json to_json() const;
  static CoherenceGrid from_json(const nlohmann::json& doc);
};

/// Runs every (country, mode) cell of the experiment. Cells already
/// persisted under out_dir are reused, so interrupted grids resume to the
/// same result; per-cell seeds derive from (seed, country, mode) only.
CoherenceGrid run_grid(const ExperimentSpec& spec, const IndicatorPanel& panel,
                       int n_jobs = 1);

/// Convenience wrapper that loads the panel named by the spec.
CoherenceGrid run_grid(const ExperimentSpec& spec, int n_jobs = 1);

enum class PerformanceMeasure { kIncomePerCapita, kMeanIndicators };

/// Pearson correlation between per-mode average coherence and a mode
/// performance measure.
double mode_performance_correlation(const CoherenceGrid& grid,
                                    const IndicatorPanel& panel,
                                    PerformanceMeasure measure);

/// (indicator similarity, coherence index) per mode for one country.
std::vector<std::pair<double, double>> similarity_vs_coherence(
    const std::string& country, const std::vector<std::string>& modes,
    const CoherenceGrid& grid, const IndicatorPanel& panel);

enum class ReportFormat { kCsv, kJson };

/// Writes the aggregate grid artifacts: the mode x country index table with
/// significance stars plus the per-figure data series. Byte-stable across
/// reruns of the same grid.
std::vector<std::string> emit_report(const CoherenceGrid& grid,
                                     const IndicatorPanel& panel,
                                     ReportFormat format,
                                     const std::string& out_dir);

}  // namespace ppi
