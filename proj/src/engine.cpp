#include "ppi/engine.hpp"

#include <algorithm>
#include <cmath>

namespace ppi {

void SimulationConfig::validate() const {
  const int n = size();
  if (n < 1) throw DegenerateInput("empty simulation config");
  if (targets.size() != n) throw DegenerateInput("targets/initial length mismatch");
  if (network.size() != n) throw DegenerateInput("network size mismatch");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw DegenerateInput("gamma must be positive");
  if (!(budget > 0.0) || budget > 1.0)
    throw DegenerateInput("budget must be in (0,1]");
  if (!(epsilon > 0.0)) throw DegenerateInput("epsilon must be positive");
  if (max_periods < 1) throw DegenerateInput("max_periods must be positive");
  if (rule_of_law_node < 0 || rule_of_law_node >= n ||
      control_of_corruption_node < 0 || control_of_corruption_node >= n)
    throw DegenerateInput("governance node index out of range");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(initial[i]) || initial[i] < 0.0 || initial[i] > 1.0)
      throw OutOfRange("initial levels must lie in [0,1]");
    if (!std::isfinite(targets[i]) || targets[i] < 0.0 || targets[i] > 1.0)
      throw OutOfRange("targets must lie in [0,1]");
  }
}

nlohmann::json SimulationConfig::to_json() const {
  nlohmann::json doc;
  doc["initial"] = std::vector<double>(initial.data(), initial.data() + initial.size());
  doc["targets"] = std::vector<double>(targets.data(), targets.data() + targets.size());
  doc["network"] = network.to_json();
  doc["gamma"] = gamma;
  doc["budget"] = budget;
  doc["beta"] = beta;
  doc["epsilon"] = epsilon;
  doc["max_periods"] = max_periods;
  doc["seed"] = seed;
  doc["rule_of_law_node"] = rule_of_law_node;
  doc["control_of_corruption_node"] = control_of_corruption_node;
  return doc;
}

SimulationConfig SimulationConfig::from_json(const nlohmann::json& doc) {
  try {
    SimulationConfig config;
    const auto initial = doc.at("initial").get<std::vector<double>>();
    const auto targets = doc.at("targets").get<std::vector<double>>();
    config.initial = Eigen::Map<const Eigen::VectorXd>(initial.data(),
                                                       static_cast<long>(initial.size()));
    config.targets = Eigen::Map<const Eigen::VectorXd>(targets.data(),
                                                       static_cast<long>(targets.size()));
    config.network = SpilloverNetwork::from_json(doc.at("network"));
    config.gamma = doc.value("gamma", config.gamma);
    config.budget = doc.value("budget", config.budget);
    config.beta = doc.value("beta", config.beta);
    config.epsilon = doc.value("epsilon", config.epsilon);
    config.max_periods = doc.value("max_periods", config.max_periods);
    config.seed = doc.value("seed", config.seed);
    config.rule_of_law_node = doc.value("rule_of_law_node", 0);
    config.control_of_corruption_node = doc.value("control_of_corruption_node", 1);
    config.validate();
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad simulation config: ") + e.what());
  }
}

nlohmann::json SimulationTrace::to_json() const {
  nlohmann::json doc;
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::json series = nlohmann::json::array();
  for (std::size_t t = 0; t < indicators.size(); ++t)
    series.push_back({{"indicators", vec(indicators[t])},
                      {"allocations", vec(allocations[t])},
                      {"contributions", vec(contributions[t])},
                      {"supervision", supervision[t]}});
  doc["periods"] = series;
  doc["periods_to_convergence"] = periods;
  doc["converged"] = converged;
  doc["total_diversion"] = total_diversion;
  return doc;
}

double governance_map(double level) {
  if (!std::isfinite(level) || level < 0.0 || level > 1.0)
    throw OutOfRange("governance indicator must lie in [0,1]");
  return level / std::exp(1.0 - level);
}

Eigen::VectorXd allocate(const Eigen::VectorXd& gaps,
                         const std::vector<int>& degrees,
                         const std::vector<std::uint8_t>& supervised,
                         double f_rule_of_law, double budget) {
  const int n = static_cast<int>(gaps.size());
  if (static_cast<int>(degrees.size()) != n ||
      static_cast<int>(supervised.size()) != n)
    throw DegenerateInput("allocate: length mismatch");
  if (!std::isfinite(f_rule_of_law) || !std::isfinite(budget) || budget <= 0.0)
    throw NonFiniteInput("allocate: bad scalar input");

  Eigen::VectorXd propensity(n);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(gaps[i])) throw NonFiniteInput("allocate: non-finite gap");
    propensity[i] = std::max(0.0, gaps[i]) * (degrees[i] + 1.0) *
                    (1.0 - (supervised[i] ? f_rule_of_law : 0.0));
  }
  const double total = propensity.sum();
  Eigen::VectorXd shares(n);
  if (total > 0.0) {
    shares = propensity / total;
  } else {
    int positive = 0;
    for (int i = 0; i < n; ++i)
      if (gaps[i] > 0.0) ++positive;
    if (positive > 0) {
      for (int i = 0; i < n; ++i)
        shares[i] = gaps[i] > 0.0 ? 1.0 / positive : 0.0;
    } else {
      shares.setConstant(1.0 / n);
    }
  }
  return shares * budget;
}

std::vector<std::uint8_t> sample_supervision(const Eigen::VectorXd& allocations,
                                             const Eigen::VectorXd& contributions,
                                             double f_control_of_corruption,
                                             Rng& rng) {
  const int n = static_cast<int>(allocations.size());
  if (contributions.size() != n)
    throw DegenerateInput("sample_supervision: length mismatch");
  double total_diverted = 0.0;
  for (int i = 0; i < n; ++i) {
    if (contributions[i] < -1e-12 || contributions[i] > allocations[i] + 1e-12)
      throw InvalidContribution("contribution outside [0, allocation]");
    total_diverted += allocations[i] - contributions[i];
  }
  std::vector<std::uint8_t> caught(n, 0);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();  // one draw per node, unconditionally
    if (total_diverted > 0.0) {
      const double p = f_control_of_corruption *
                       (allocations[i] - contributions[i]) / total_diverted;
      caught[i] = u < p ? 1 : 0;
    }
  }
  return caught;
}

double benefit(double indicator, double allocation, double contribution,
               bool caught, double f_rule_of_law) {
  return (indicator + allocation - contribution) *
         (1.0 - (caught ? f_rule_of_law : 0.0));
}

double update_contribution(const ContributionHistory& history, double allocation) {
  const double benefit_change = history.benefit_prev - history.benefit_prev2;
  const double contribution_change =
      history.contribution_prev - history.contribution_prev2;
  const double product = benefit_change * contribution_change;
  const double direction = product > 0.0 ? 1.0 : (product < 0.0 ? -1.0 : 0.0);
  const double step = direction * std::abs(benefit_change) *
                      (history.contribution_prev + history.contribution_prev2) / 2.0;
  return std::clamp(history.contribution_prev + step, 0.0, allocation);
}

Eigen::VectorXd step_indicators(const Eigen::VectorXd& levels,
                                const Eigen::VectorXd& contributions,
                                const SimulationConfig& config) {
  const int n = config.size();
  if (levels.size() != n || contributions.size() != n)
    throw DegenerateInput("step_indicators: length mismatch");
  Eigen::VectorXd next(n);
  for (int i = 0; i < n; ++i) {
    double spillover = 0.0;
    for (int j = 0; j < n; ++j)
      spillover += contributions[j] * config.network.adjacency(j, i);
    // gaps already closed stay closed: met targets freeze the indicator
    const double gap = std::max(0.0, config.targets[i] - levels[i]);
    const double change =
        config.gamma * gap * (contributions[i] + config.beta * spillover);
    next[i] = std::clamp(levels[i] + change, 0.0, 1.0);
  }
  return next;
}

namespace {

double worst_gap(const Eigen::VectorXd& targets, const Eigen::VectorXd& levels) {
  double worst = 0.0;
  for (int i = 0; i < targets.size(); ++i)
    worst = std::max(worst, targets[i] - levels[i]);
  return worst;
}

}  // namespace

SimulationTrace run_simulation(const SimulationConfig& config) {
  config.validate();
  const int n = config.size();
  SimulationTrace trace;

  Eigen::VectorXd levels = config.initial;
  if (worst_gap(config.targets, levels) <= config.epsilon) {
    trace.converged = true;
    return trace;
  }

  Rng rng(config.seed);
  const std::vector<std::uint8_t> nobody(n, 0);

  // bootstrap: two seed periods of contributions/benefits around the first
  // allocation, with no supervision
  const double f_rule0 = governance_map(levels[config.rule_of_law_node]);
  const Eigen::VectorXd first_allocation = allocate(
      config.targets - levels, config.network.degrees, nobody, f_rule0,
      config.budget);
  Eigen::VectorXd contribution_prev2(n), contribution_prev(n);
  for (int i = 0; i < n; ++i) contribution_prev2[i] = rng.uniform() * first_allocation[i];
  for (int i = 0; i < n; ++i) contribution_prev[i] = rng.uniform() * first_allocation[i];
  Eigen::VectorXd benefit_prev2(n), benefit_prev(n);
  for (int i = 0; i < n; ++i) {
    benefit_prev2[i] =
        benefit(levels[i], first_allocation[i], contribution_prev2[i], false, f_rule0);
    benefit_prev[i] =
        benefit(levels[i], first_allocation[i], contribution_prev[i], false, f_rule0);
  }

  std::vector<std::uint8_t> supervised_prev(n, 0);
  double diverted_total = 0.0;

  for (int period = 1; period <= config.max_periods; ++period) {
    const double f_rule = governance_map(levels[config.rule_of_law_node]);
    const double f_corruption =
        governance_map(levels[config.control_of_corruption_node]);

    const Eigen::VectorXd allocation =
        allocate(config.targets - levels, config.network.degrees, supervised_prev,
                 f_rule, config.budget);

    Eigen::VectorXd contribution(n);
    for (int i = 0; i < n; ++i)
      contribution[i] = update_contribution(
          {contribution_prev[i], contribution_prev2[i], benefit_prev[i],
           benefit_prev2[i]},
          allocation[i]);

    const std::vector<std::uint8_t> supervised =
        sample_supervision(allocation, contribution, f_corruption, rng);

    Eigen::VectorXd benefits(n);
    for (int i = 0; i < n; ++i)
      benefits[i] =
          benefit(levels[i], allocation[i], contribution[i], supervised[i], f_rule);

    levels = step_indicators(levels, contribution, config);

    diverted_total += (allocation - contribution).sum();
    trace.indicators.push_back(levels);
    trace.allocations.push_back(allocation);
    trace.contributions.push_back(contribution);
    trace.supervision.push_back(supervised);

    contribution_prev2.swap(contribution_prev);
    contribution_prev = contribution;
    benefit_prev2.swap(benefit_prev);
    benefit_prev = benefits;
    supervised_prev = supervised;

    if (worst_gap(config.targets, levels) <= config.epsilon) {
      trace.converged = true;
      break;
    }
  }

  trace.periods = static_cast<int>(trace.indicators.size());
  trace.total_diversion = diverted_total / (n * config.budget);
  return trace;
}

ProfileSamples expected_profile(const SimulationConfig& config, int n_runs,
                                std::uint64_t master_seed) {
  if (n_runs < 1) throw DegenerateInput("need at least one run");
  config.validate();
  const int n = config.size();

  ProfileSamples samples;
  samples.runs.reserve(n_runs);
  std::vector<double> mean(n, 0.0);

  for (int run = 0; run < n_runs; ++run) {
    SimulationConfig run_config = config;
    run_config.seed = derive_run_seed(master_seed, static_cast<std::uint64_t>(run));
    const SimulationTrace trace = run_simulation(run_config);

    AllocationProfile profile;
    profile.shares.assign(n, 0.0);
    if (trace.periods == 0) {
      // degenerate run: fall back to the shares of the opening allocation
      const std::vector<std::uint8_t> nobody(n, 0);
      const Eigen::VectorXd opening = allocate(
          config.targets - config.initial, config.network.degrees, nobody,
          governance_map(config.initial[config.rule_of_law_node]), config.budget);
      for (int i = 0; i < n; ++i) profile.shares[i] = opening[i] / config.budget;
    } else {
      for (const auto& allocation : trace.allocations)
        for (int i = 0; i < n; ++i)
          profile.shares[i] += allocation[i] / config.budget;
      for (int i = 0; i < n; ++i)
        profile.shares[i] /= static_cast<double>(trace.periods);
    }
    for (int i = 0; i < n; ++i) mean[i] += profile.shares[i];
    samples.runs.push_back(std::move(profile));
  }

  for (int i = 0; i < n; ++i) mean[i] /= static_cast<double>(n_runs);
  samples.mean.shares = std::move(mean);
  return samples;
}

}  // namespace ppi
