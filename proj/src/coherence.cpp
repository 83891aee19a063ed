#include "ppi/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ppi {

namespace {

SimulationConfig country_config(const IndicatorPanel& panel,
                                const SpilloverNetwork& network,
                                const std::string& country,
                                const Eigen::VectorXd& initial,
                                const Eigen::VectorXd& targets, double gamma) {
  SimulationConfig config;
  config.initial = initial;
  config.targets = targets;
  config.network = network;
  config.gamma = gamma;
  config.budget = panel.meta(country).budget_fraction;
  config.rule_of_law_node = panel.role_index(kRuleOfLawRole);
  config.control_of_corruption_node = panel.role_index(kControlOfCorruptionRole);
  return config;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

DistanceMetric metric_from_name(const std::string& name) {
  if (name == "l1") return DistanceMetric::kL1;
  if (name == "cosine") return DistanceMetric::kCosine;
  if (name == "correlation") return DistanceMetric::kCorrelation;
  if (name == "euclidean") return DistanceMetric::kEuclidean;
  throw DegenerateInput("unknown distance metric: " + name);
}

std::string metric_name(DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::kL1: return "l1";
    case DistanceMetric::kCosine: return "cosine";
    case DistanceMetric::kCorrelation: return "correlation";
    case DistanceMetric::kEuclidean: return "euclidean";
  }
  return "l1";
}

ProfileSamples retrospective_profile(const IndicatorPanel& panel,
                                     const SpilloverNetwork& network,
                                     const std::string& country, double gamma,
                                     int n_runs, std::uint64_t seed) {
  const SimulationConfig config = country_config(
      panel, network, country, panel.first_year_values(country),
      panel.last_year_values(country), gamma);
  return expected_profile(config, n_runs, seed);
}

ProfileSamples consistent_profile(const IndicatorPanel& panel,
                                  const SpilloverNetwork& network,
                                  const std::string& country,
                                  const std::string& mode, double gamma,
                                  int n_runs, std::uint64_t seed) {
  if (mode == country)
    throw UnknownMode("mode must differ from the country under study");
  panel.country_index(mode);  // raises UnknownCountry for unknown modes
  const SimulationConfig config = country_config(
      panel, network, country, panel.first_year_values(country),
      panel.first_year_values(mode), gamma);
  return expected_profile(config, n_runs, seed);
}

AllocationProfile inconsistent_profile(const AllocationProfile& consistent) {
  const int n = consistent.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return consistent.shares[a] < consistent.shares[b];
  });
  std::vector<double> descending = consistent.shares;
  std::sort(descending.begin(), descending.end(), std::greater<>());

  AllocationProfile reversed;
  reversed.shares.assign(n, 0.0);
  for (int rank = 0; rank < n; ++rank)
    reversed.shares[order[rank]] = descending[rank];
  return reversed;
}

double distance(const std::vector<double>& x, const std::vector<double>& y,
                DistanceMetric metric) {
  if (x.size() != y.size()) throw DegenerateInput("distance: length mismatch");
  if (x.empty()) throw DegenerateVector("distance: empty vectors");
  switch (metric) {
    case DistanceMetric::kL1: {
      double sum = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
      return sum;
    }
    case DistanceMetric::kEuclidean: {
      double sum = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        sum += (x[i] - y[i]) * (x[i] - y[i]);
      return std::sqrt(sum);
    }
    case DistanceMetric::kCosine: {
      const double nx = norm(x);
      const double ny = norm(y);
      if (nx == 0.0 || ny == 0.0)
        throw DegenerateVector("cosine distance needs nonzero vectors");
      return 1.0 - dot(x, y) / (nx * ny);
    }
    case DistanceMetric::kCorrelation: {
      const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
      const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
      std::vector<double> cx(x.size()), cy(y.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        cx[i] = x[i] - mx;
        cy[i] = y[i] - my;
      }
      const double nx = norm(cx);
      const double ny = norm(cy);
      if (nx == 0.0 || ny == 0.0)
        throw DegenerateVector("correlation distance needs non-constant vectors");
      return 1.0 - dot(cx, cy) / (nx * ny);
    }
  }
  throw DegenerateInput("unreachable metric");
}

double coherence_index(const AllocationProfile& retrospective,
                       const AllocationProfile& consistent,
                       const AllocationProfile& inconsistent,
                       DistanceMetric metric) {
  const double to_inconsistent =
      distance(retrospective.shares, inconsistent.shares, metric);
  const double to_consistent =
      distance(retrospective.shares, consistent.shares, metric);
  const double total = to_inconsistent + to_consistent;
  if (total == 0.0)
    throw UndefinedIndex("profiles coincide; the index is undefined");
  return (to_inconsistent - to_consistent) / total;
}

std::string significance_stars(double p_value) {
  if (p_value < 0.05) return "**";
  if (p_value < 0.1) return "*";
  return "";
}

CoherenceResult coherence_with_significance(
    const std::vector<AllocationProfile>& retrospective_runs,
    const std::vector<AllocationProfile>& consistent_runs,
    DistanceMetric metric) {
  if (retrospective_runs.size() != consistent_runs.size())
    throw RunCountMismatch("paired run counts differ");
  if (retrospective_runs.empty()) throw RunCountMismatch("no runs");

  CoherenceResult result;
  result.metric = metric;
  result.h_samples.reserve(retrospective_runs.size());
  for (std::size_t m = 0; m < retrospective_runs.size(); ++m) {
    const AllocationProfile reversed = inconsistent_profile(consistent_runs[m]);
    result.h_samples.push_back(coherence_index(
        retrospective_runs[m], consistent_runs[m], reversed, metric));
  }
  const double count = static_cast<double>(result.h_samples.size());
  result.h = std::accumulate(result.h_samples.begin(), result.h_samples.end(), 0.0) /
             count;
  double below = 0.0;
  double above = 0.0;
  for (double h : result.h_samples) {
    if (h <= 0.0) ++below;
    if (h >= 0.0) ++above;
  }
  result.p_value = std::min(1.0, 2.0 * std::min(below / count, above / count));
  result.stars = significance_stars(result.p_value);

  // mean-profile differences
  const int n = retrospective_runs.front().size();
  std::vector<double> mean_retro(n, 0.0), mean_consistent(n, 0.0);
  for (std::size_t m = 0; m < retrospective_runs.size(); ++m)
    for (int i = 0; i < n; ++i) {
      mean_retro[i] += retrospective_runs[m].shares[i];
      mean_consistent[i] += consistent_runs[m].shares[i];
    }
  result.diffs.resize(n);
  for (int i = 0; i < n; ++i)
    result.diffs[i] = (mean_retro[i] - mean_consistent[i]) / count;
  return result;
}

nlohmann::json CoherenceResult::to_json() const {
  return {{"h", h},
          {"h_samples", h_samples},
          {"p_value", p_value},
          {"stars", stars},
          {"diffs", diffs},
          {"metric", metric_name(metric)}};
}

CoherenceResult CoherenceResult::from_json(const nlohmann::json& doc) {
  try {
    CoherenceResult result;
    result.h = doc.at("h").get<double>();
    result.h_samples = doc.at("h_samples").get<std::vector<double>>();
    result.p_value = doc.at("p_value").get<double>();
    result.stars = doc.at("stars").get<std::string>();
    result.diffs = doc.at("diffs").get<std::vector<double>>();
    result.metric = metric_from_name(doc.at("metric").get<std::string>());
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad coherence result json: ") + e.what());
  }
}

std::vector<double> allocative_inefficiencies(const AllocationProfile& retrospective,
                                              const AllocationProfile& consistent) {
  if (retrospective.size() != consistent.size())
    throw DegenerateInput("profile length mismatch");
  std::vector<double> diffs(retrospective.shares.size());
  for (std::size_t i = 0; i < diffs.size(); ++i)
    diffs[i] = retrospective.shares[i] - consistent.shares[i];
  return diffs;
}

std::map<int, double> pillar_inefficiencies(
    const std::vector<double>& diffs, const std::vector<IndicatorInfo>& indicators) {
  if (diffs.size() != indicators.size())
    throw DegenerateInput("diffs/indicator length mismatch");
  std::map<int, double> by_pillar;
  for (std::size_t i = 0; i < diffs.size(); ++i)
    by_pillar[indicators[i].pillar] += diffs[i];
  return by_pillar;
}

double indicator_similarity(const IndicatorPanel& panel,
                            const std::string& country, const std::string& mode) {
  const Eigen::VectorXd final_levels = panel.last_year_values(country);
  const Eigen::VectorXd mode_initial = panel.first_year_values(mode);
  const Eigen::VectorXd cx = final_levels.array() - final_levels.mean();
  const Eigen::VectorXd cy = mode_initial.array() - mode_initial.mean();
  const double nx = cx.norm();
  const double ny = cy.norm();
  if (nx == 0.0 || ny == 0.0)
    throw ZeroVariance("constant indicator vector has no similarity");
  return std::clamp(cx.dot(cy) / (nx * ny), -1.0, 1.0);
}

}  // namespace ppi
