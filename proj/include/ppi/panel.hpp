#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppi/errors.hpp"

namespace ppi {

struct IndicatorInfo {
  std::string id;
  int pillar = 1;
  // Inputs are assumed already adjusted so that higher values mean better
  // outcomes; the flag only records that assumption.
  bool direction_adjusted = true;
};

struct CountryMeta {
  double income_per_capita = 0.0;
  // Public expenditure available for transformative policy, as a share of
  // GDP. Must lie in (0, 1].
  double budget_fraction = 0.0;
};

/// Role names every panel must map to an indicator id.
inline constexpr const char* kRuleOfLawRole = "rule_of_law";
inline constexpr const char* kControlOfCorruptionRole = "control_of_corruption";
inline constexpr const char* kDiversionOfFundsRole = "diversion_of_funds";

/// Complete country x indicator x year panel of normalized development
/// indicators plus the metadata needed by the rest of the pipeline.
/// Immutable after construction; safe to share across threads.
class IndicatorPanel {
 public:
  IndicatorPanel(std::vector<std::string> countries,
                 std::vector<IndicatorInfo> indicators, std::vector<int> years,
                 std::vector<double> values,
                 std::map<std::string, std::string> roles,
                 std::map<std::string, CountryMeta> country_meta,
                 std::vector<std::string> early_members = {},
                 std::string reference = {});

  const std::vector<std::string>& countries() const { return countries_; }
  const std::vector<IndicatorInfo>& indicators() const { return indicators_; }
  const std::vector<int>& years() const { return years_; }
  const std::map<std::string, std::string>& roles() const { return roles_; }
  const std::vector<std::string>& early_members() const { return early_members_; }
  const std::string& reference() const { return reference_; }

  int n_countries() const { return static_cast<int>(countries_.size()); }
  int n_indicators() const { return static_cast<int>(indicators_.size()); }
  int n_years() const { return static_cast<int>(years_.size()); }

  int country_index(const std::string& code) const;
  int indicator_index(const std::string& id) const;
  /// Index of the indicator fulfilling a role (e.g. "rule_of_law").
  int role_index(const std::string& role) const;

  const CountryMeta& meta(const std::string& country) const;

  double value(int country, int indicator, int year) const {
    return values_[(static_cast<std::size_t>(country) * indicators_.size() +
                    indicator) * years_.size() + year];
  }

  /// Year x indicator matrix for one country.
  Eigen::MatrixXd series(const std::string& country) const;
  /// Indicator vector at the first / last sample year.
  Eigen::VectorXd first_year_values(const std::string& country) const;
  Eigen::VectorXd last_year_values(const std::string& country) const;
  /// Mean of all indicator values of a country over the sample window.
  double mean_indicator_level(const std::string& country) const;

  /// Distinct pillar ids, ascending.
  std::vector<int> pillar_ids() const;

  nlohmann::json to_json() const;
  static IndicatorPanel from_json(const nlohmann::json& doc);

 private:
  void validate() const;

  std::vector<std::string> countries_;
  std::vector<IndicatorInfo> indicators_;
  std::vector<int> years_;
  std::vector<double> values_;  // (country * I + indicator) * Y + year
  std::map<std::string, std::string> roles_;
  std::map<std::string, CountryMeta> country_meta_;
  std::vector<std::string> early_members_;
  std::string reference_;
  std::map<std::string, int> country_lookup_;
  std::map<std::string, int> indicator_lookup_;
};

/// Group labels: 1 = early club members, 2 = higher income per capita than
/// the reference, 3 = the reference singleton, 4 = the rest.
struct CountryGroups {
  std::map<std::string, int> assignment;

  std::vector<std::string> members(int group) const;
};

/// Load a long-format CSV (country,indicator,year,value) plus its JSON
/// metadata sidecar (roles, pillars, income per capita, budget fractions,
/// early-member list). Rejects values outside [0,1] and incomplete panels;
/// no imputation is attempted.
IndicatorPanel load_panel(const std::string& csv_path,
                          const std::string& meta_path);

/// Write the canonical JSON dump of a panel.
void save_panel(const IndicatorPanel& panel, const std::string& path);
/// Load a panel from its canonical JSON dump.
IndicatorPanel load_panel_json(const std::string& path);

CountryGroups classify_groups(const IndicatorPanel& panel,
                              const std::string& reference,
                              const std::set<std::string>& early_members);

struct PillarMeans {
  std::vector<int> pillars;   // row labels, ascending pillar id
  std::vector<int> groups;    // column labels (1..4)
  Eigen::MatrixXd means;      // pillar x group
};

/// Mean indicator level per (pillar, group) over a closed year range.
PillarMeans pillar_means(const IndicatorPanel& panel,
                         const CountryGroups& groups, int year_from,
                         int year_to);

/// Deterministic synthetic panel: bounded random walks in [0,1], roles on
/// the first three indicators, income and budget metadata in valid ranges.
IndicatorPanel generate_synthetic_panel(int n_countries, int n_indicators,
                                        int n_years, std::uint64_t seed);

}  // namespace ppi
