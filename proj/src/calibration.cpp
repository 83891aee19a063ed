#include "ppi/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "ppi/rng.hpp"

namespace ppi {

double empirical_corruption(const IndicatorPanel& panel,
                            const std::string& country) {
  const int c = panel.country_index(country);
  const int diversion = panel.role_index(kDiversionOfFundsRole);
  double mean = 0.0;
  for (int y = 0; y < panel.n_years(); ++y) mean += panel.value(c, diversion, y);
  mean /= panel.n_years();
  // indicators are direction-adjusted (higher is better), so corruption is
  // the complement
  return 1.0 - mean;
}

double simulated_corruption(const SimulationConfig& config, int n_runs,
                            std::uint64_t seed) {
  if (n_runs < 1) throw DegenerateInput("need at least one run");
  double total = 0.0;
  for (int run = 0; run < n_runs; ++run) {
    SimulationConfig run_config = config;
    run_config.seed = derive_run_seed(seed, static_cast<std::uint64_t>(run));
    total += run_simulation(run_config).total_diversion;
  }
  return total / n_runs;
}

SimulationConfig config_for_country(const IndicatorPanel& panel,
                                    const SpilloverNetwork& network,
                                    const std::string& country, double gamma) {
  SimulationConfig config;
  config.initial = panel.first_year_values(country);
  config.targets = panel.last_year_values(country);
  config.network = network;
  config.gamma = gamma;
  config.budget = panel.meta(country).budget_fraction;
  config.rule_of_law_node = panel.role_index(kRuleOfLawRole);
  config.control_of_corruption_node = panel.role_index(kControlOfCorruptionRole);
  return config;
}

namespace {

struct FitContext {
  const IndicatorPanel& panel;
  const std::map<std::string, SpilloverNetwork>& networks;
  const CalibrationOptions& options;
  std::vector<std::string> ordered;          // by empirical corruption
  std::vector<double> empirical;             // aligned with ordered
  // gamma -> simulated corruption, per country (objective memoization)
  std::map<std::string, std::map<double, double>> cache;

  double simulated(const std::string& country, double gamma) {
    auto& per_country = cache[country];
    auto it = per_country.find(gamma);
    if (it != per_country.end()) return it->second;
    SimulationConfig config = config_for_country(
        panel, networks.at(country), country, gamma);
    config.max_periods = options.max_periods;
    const double value = simulated_corruption(
        config, options.n_runs,
        derive_cell_seed(options.seed, country, "calibration"));
    per_country.emplace(gamma, value);
    return value;
  }

  // squared-error loss of one contiguous segment [lo, hi) under one gamma
  double segment_loss(int lo, int hi, double gamma) {
    double loss = 0.0;
    for (int i = lo; i < hi; ++i) {
      const double diff = simulated(ordered[i], gamma) - empirical[i];
      loss += diff * diff;
    }
    return loss;
  }
};

struct SegmentFit {
  double gamma = 0.0;
  double loss = 0.0;
};

/// Golden-section minimization of the segment loss over the gamma bounds;
/// returns the best probed point.
SegmentFit fit_segment(FitContext& ctx, int lo, int hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = ctx.options.gamma_lo;
  double b = ctx.options.gamma_hi;

  SegmentFit best{a, ctx.segment_loss(lo, hi, a)};
  auto probe = [&](double gamma) {
    const double loss = ctx.segment_loss(lo, hi, gamma);
    if (loss < best.loss) best = {gamma, loss};
    return loss;
  };
  probe(b);

  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = probe(c);
  double fd = probe(d);
  while (b - a > ctx.options.search_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = probe(d);
    }
  }
  probe((a + b) / 2.0);
  return best;
}

struct Segment {
  int lo = 0;
  int hi = 0;  // exclusive
  SegmentFit fit;
};

}  // namespace

CalibrationResult fit_gamma(const IndicatorPanel& panel,
                            const std::map<std::string, SpilloverNetwork>& networks,
                            const std::vector<std::string>& countries,
                            const CalibrationOptions& options) {
  if (countries.empty()) throw DegenerateInput("no countries to calibrate");
  if (options.k_max < 1) throw DegenerateInput("k_max must be at least 1");
  if (!(options.gamma_lo > 0.0) || !(options.gamma_hi > options.gamma_lo))
    throw SearchBoundsInvalid("need 0 < gamma_lo < gamma_hi");
  for (const auto& country : countries)
    if (networks.find(country) == networks.end())
      throw NoNetwork("no spillover network for " + country);

  FitContext ctx{panel, networks, options, {}, {}, {}};
  std::vector<std::pair<double, std::string>> by_corruption;
  for (const auto& country : countries)
    by_corruption.emplace_back(empirical_corruption(panel, country), country);
  std::sort(by_corruption.begin(), by_corruption.end());
  for (const auto& [level, country] : by_corruption) {
    ctx.ordered.push_back(country);
    ctx.empirical.push_back(level);
  }

  const int n_countries = static_cast<int>(countries.size());
  const int k_cap = std::min(options.k_max, n_countries);

  // greedy nested splitting: each level refines the previous partition, so
  // the unpenalized loss cannot increase with k
  std::vector<std::vector<Segment>> partitions;
  std::vector<Segment> current = {{0, n_countries, fit_segment(ctx, 0, n_countries)}};
  partitions.push_back(current);
  for (int k = 2; k <= k_cap; ++k) {
    double best_total = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    int best_cut = -1;
    SegmentFit best_left, best_right;
    const double current_total =
        std::accumulate(current.begin(), current.end(), 0.0,
                        [](double acc, const Segment& s) { return acc + s.fit.loss; });
    for (std::size_t s = 0; s < current.size(); ++s) {
      const Segment& segment = current[s];
      for (int cut = segment.lo + 1; cut < segment.hi; ++cut) {
        SegmentFit left = fit_segment(ctx, segment.lo, cut);
        SegmentFit right = fit_segment(ctx, cut, segment.hi);
        // the parent optimum stays feasible for both halves
        const double left_at_parent =
            ctx.segment_loss(segment.lo, cut, segment.fit.gamma);
        if (left_at_parent < left.loss) left = {segment.fit.gamma, left_at_parent};
        const double right_at_parent =
            ctx.segment_loss(cut, segment.hi, segment.fit.gamma);
        if (right_at_parent < right.loss) right = {segment.fit.gamma, right_at_parent};
        const double total =
            current_total - segment.fit.loss + left.loss + right.loss;
        if (total < best_total) {
          best_total = total;
          best_index = s;
          best_cut = cut;
          best_left = left;
          best_right = right;
        }
      }
    }
    const Segment split = current[best_index];
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(best_index));
    current.insert(current.begin() + static_cast<std::ptrdiff_t>(best_index),
                   {split.lo, best_cut, best_left});
    current.insert(current.begin() + static_cast<std::ptrdiff_t>(best_index) + 1,
                   {best_cut, split.hi, best_right});
    partitions.push_back(current);
  }

  // penalized selection of the cluster count
  CalibrationResult result;
  int chosen = 1;
  double best_penalized = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < partitions.size(); ++k) {
    double loss = 0.0;
    for (const auto& segment : partitions[k]) loss += segment.fit.loss;
    result.loss_by_k.push_back(loss);
    const double penalized =
        loss + options.penalty_weight * static_cast<double>(k + 1) *
                   std::log(static_cast<double>(n_countries));
    if (penalized < best_penalized) {
      best_penalized = penalized;
      chosen = static_cast<int>(k + 1);
    }
  }

  const auto& partition = partitions[chosen - 1];
  result.loss = result.loss_by_k[chosen - 1];
  for (const auto& segment : partition) {
    std::vector<std::string> cluster;
    for (int i = segment.lo; i < segment.hi; ++i) {
      const auto& country = ctx.ordered[i];
      cluster.push_back(country);
      result.gamma[country] = segment.fit.gamma;
      result.empirical[country] = ctx.empirical[i];
      result.simulated[country] = ctx.simulated(country, segment.fit.gamma);
    }
    result.clusters.push_back(std::move(cluster));
  }
  return result;
}

nlohmann::json CalibrationResult::to_json() const {
  nlohmann::json doc;
  nlohmann::json per_country;
  for (const auto& [country, g] : gamma) {
    int cluster_id = 0;
    for (std::size_t k = 0; k < clusters.size(); ++k)
      if (std::find(clusters[k].begin(), clusters[k].end(), country) !=
          clusters[k].end())
        cluster_id = static_cast<int>(k);
    per_country[country] = {{"gamma", g},
                            {"cluster", cluster_id},
                            {"empirical", empirical.at(country)},
                            {"simulated", simulated.at(country)}};
  }
  doc["countries"] = per_country;
  doc["clusters"] = clusters;
  doc["loss"] = loss;
  doc["loss_by_k"] = loss_by_k;
  return doc;
}

CalibrationResult CalibrationResult::from_json(const nlohmann::json& doc) {
  try {
    CalibrationResult result;
    result.clusters = doc.at("clusters").get<std::vector<std::vector<std::string>>>();
    result.loss = doc.at("loss").get<double>();
    result.loss_by_k = doc.value("loss_by_k", std::vector<double>{});
    for (const auto& [country, entry] : doc.at("countries").items()) {
      result.gamma[country] = entry.at("gamma").get<double>();
      result.empirical[country] = entry.value("empirical", 0.0);
      result.simulated[country] = entry.value("simulated", 0.0);
    }
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad calibration json: ") + e.what());
  }
}

void save_calibration(const CalibrationResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << result.to_json().dump(2) << "\n";
}

CalibrationResult load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad calibration json: ") + e.what());
  }
  return CalibrationResult::from_json(doc);
}

}  // namespace ppi
