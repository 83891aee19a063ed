#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppi/engine.hpp"
#include "ppi/panel.hpp"
#include "ppi/profile.hpp"

namespace ppi {

enum class DistanceMetric { kL1, kCosine, kCorrelation, kEuclidean };

DistanceMetric metric_from_name(const std::string& name);
std::string metric_name(DistanceMetric metric);

/// Allocation profiles from simulating a country toward its own observed
/// final-year indicators.
ProfileSamples retrospective_profile(const IndicatorPanel& panel,
                                     const SpilloverNetwork& network,
                                     const std::string& country, double gamma,
                                     int n_runs, std::uint64_t seed);

/// Counterfactual profiles from simulating the country toward the mode
/// country's initial-year indicators, with the country's own network,
/// gamma and budget.
ProfileSamples consistent_profile(const IndicatorPanel& panel,
                                  const SpilloverNetwork& network,
                                  const std::string& country,
                                  const std::string& mode, double gamma,
                                  int n_runs, std::uint64_t seed);

/// Rank-reversing permutation of a profile's values: the largest share
/// moves to the index of the smallest and so on; ties resolve by index.
AllocationProfile inconsistent_profile(const AllocationProfile& consistent);

double distance(const std::vector<double>& x, const std::vector<double>& y,
                DistanceMetric metric);

/// Normalized contrast between the distances to the inconsistent and the
/// consistent profile; -1 (fully incoherent) .. 1 (fully coherent).
double coherence_index(const AllocationProfile& retrospective,
                       const AllocationProfile& consistent,
                       const AllocationProfile& inconsistent,
                       DistanceMetric metric);

struct CoherenceResult {
  double h = 0.0;                   // mean of h_samples
  std::vector<double> h_samples;    // per-run index values
  double p_value = 1.0;             // two-sided Monte Carlo percentile vs 0
  std::string stars;                // "" | "*" | "**"
  std::vector<double> diffs;        // per-indicator mean retro - consistent
  DistanceMetric metric = DistanceMetric::kL1;

  nlohmann::json to_json() const;
  static CoherenceResult from_json(const nlohmann::json& doc);
};

/// Pairs run-level retrospective and consistent profiles, derives the
/// inconsistent profile per run, and summarizes the resulting index
/// distribution with a two-sided percentile significance level.
CoherenceResult coherence_with_significance(
    const std::vector<AllocationProfile>& retrospective_runs,
    const std::vector<AllocationProfile>& consistent_runs,
    DistanceMetric metric);

std::string significance_stars(double p_value);

/// Per-indicator over/under-expenditure relative to the consistent profile.
std::vector<double> allocative_inefficiencies(const AllocationProfile& retrospective,
                                              const AllocationProfile& consistent);

/// Sums per-indicator differences into pillar totals.
std::map<int, double> pillar_inefficiencies(const std::vector<double>& diffs,
                                            const std::vector<IndicatorInfo>& indicators);

/// Pearson correlation between the country's final-year indicator vector
/// and the mode's initial-year vector.
double indicator_similarity(const IndicatorPanel& panel,
                            const std::string& country, const std::string& mode);

}  // namespace ppi
