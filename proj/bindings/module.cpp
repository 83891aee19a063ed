#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "ppi/calibration.hpp"
#include "ppi/coherence.hpp"
#include "ppi/engine.hpp"
#include "ppi/experiment.hpp"
#include "ppi/network.hpp"
#include "ppi/panel.hpp"

namespace py = pybind11;
using namespace ppi;

namespace {

AllocationProfile make_profile(std::vector<double> shares) {
  AllocationProfile profile{std::move(shares)};
  profile.validate();
  return profile;
}

std::vector<std::vector<double>> run_shares(const ProfileSamples& samples) {
  std::vector<std::vector<double>> out;
  out.reserve(samples.runs.size());
  for (const auto& run : samples.runs) out.push_back(run.shares);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Policy priority inference: spillover networks, the allocation "
            "game, calibration and the coherence index";

  py::register_exception<Error>(m, "PpiError");

  py::class_<IndicatorInfo>(m, "IndicatorInfo")
      .def_readonly("id", &IndicatorInfo::id)
      .def_readonly("pillar", &IndicatorInfo::pillar)
      .def_readonly("direction_adjusted", &IndicatorInfo::direction_adjusted);

  py::class_<CountryMeta>(m, "CountryMeta")
      .def_readonly("income_per_capita", &CountryMeta::income_per_capita)
      .def_readonly("budget_fraction", &CountryMeta::budget_fraction);

  py::class_<IndicatorPanel>(m, "IndicatorPanel")
      .def_property_readonly("countries", &IndicatorPanel::countries)
      .def_property_readonly("indicators", &IndicatorPanel::indicators)
      .def_property_readonly("years", &IndicatorPanel::years)
      .def_property_readonly("roles", &IndicatorPanel::roles)
      .def_property_readonly("early_members", &IndicatorPanel::early_members)
      .def_property_readonly("reference", &IndicatorPanel::reference)
      .def("value", &IndicatorPanel::value)
      .def("series", &IndicatorPanel::series)
      .def("first_year_values", &IndicatorPanel::first_year_values)
      .def("last_year_values", &IndicatorPanel::last_year_values)
      .def("mean_indicator_level", &IndicatorPanel::mean_indicator_level)
      .def("meta", &IndicatorPanel::meta)
      .def("role_index", &IndicatorPanel::role_index)
      .def("to_json", [](const IndicatorPanel& p) { return p.to_json().dump(); })
      .def_static("from_json", [](const std::string& text) {
        return IndicatorPanel::from_json(nlohmann::json::parse(text));
      });

  py::class_<CountryGroups>(m, "CountryGroups")
      .def_readonly("assignment", &CountryGroups::assignment)
      .def("members", &CountryGroups::members);

  m.def("load_panel", &load_panel, py::arg("csv_path"), py::arg("meta_path"));
  m.def("load_panel_json", &load_panel_json, py::arg("path"));
  m.def("save_panel", &save_panel, py::arg("panel"), py::arg("path"));
  m.def("generate_synthetic_panel", &generate_synthetic_panel,
        py::arg("n_countries"), py::arg("n_indicators"), py::arg("n_years"),
        py::arg("seed"));
  m.def("classify_groups",
        [](const IndicatorPanel& panel, const std::string& reference,
           const std::vector<std::string>& early) {
          return classify_groups(panel, reference, {early.begin(), early.end()});
        },
        py::arg("panel"), py::arg("reference"), py::arg("early_members"));

  py::class_<SpilloverNetwork>(m, "SpilloverNetwork")
      .def_readonly("adjacency", &SpilloverNetwork::adjacency)
      .def_readonly("degrees", &SpilloverNetwork::degrees)
      .def("size", &SpilloverNetwork::size)
      .def_static("from_adjacency", &SpilloverNetwork::from_adjacency)
      .def("to_json",
           [](const SpilloverNetwork& n) { return n.to_json().dump(); });

  m.def("first_differences", &first_differences, py::arg("series"));
  m.def("similarity_matrix", &similarity_matrix, py::arg("diffs"));
  m.def("tmfg_filter",
        [](const Eigen::MatrixXd& weights, bool absolute) {
          return tmfg_filter(weights, absolute ? EdgeScore::kAbsolute
                                               : EdgeScore::kSigned);
        },
        py::arg("weights"), py::arg("absolute") = true);
  m.def("orient_edge",
        [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
          const OrientedEdge edge = orient_edge(x, y);
          return py::make_tuple(
              edge.direction == EdgeDirection::kXToY ? "x->y" : "y->x",
              edge.weight, edge.statistic);
        },
        py::arg("x"), py::arg("y"));
  m.def("estimate_network", &estimate_network, py::arg("panel"),
        py::arg("country"), py::arg("pool") = std::vector<std::string>{});

  py::class_<SimulationConfig>(m, "SimulationConfig")
      .def(py::init([](Eigen::VectorXd initial, Eigen::VectorXd targets,
                       const SpilloverNetwork& network, double gamma,
                       double budget, double beta, double epsilon,
                       int max_periods, std::uint64_t seed, int rule_of_law_node,
                       int control_of_corruption_node) {
             SimulationConfig config;
             config.initial = std::move(initial);
             config.targets = std::move(targets);
             config.network = network;
             config.gamma = gamma;
             config.budget = budget;
             config.beta = beta;
             config.epsilon = epsilon;
             config.max_periods = max_periods;
             config.seed = seed;
             config.rule_of_law_node = rule_of_law_node;
             config.control_of_corruption_node = control_of_corruption_node;
             config.validate();
             return config;
           }),
           py::arg("initial"), py::arg("targets"), py::arg("network"),
           py::arg("gamma") = 0.5, py::arg("budget") = 1.0, py::arg("beta") = 1.0,
           py::arg("epsilon") = 1e-2, py::arg("max_periods") = 10000,
           py::arg("seed") = 0, py::arg("rule_of_law_node") = 0,
           py::arg("control_of_corruption_node") = 1)
      .def_readwrite("gamma", &SimulationConfig::gamma)
      .def_readwrite("budget", &SimulationConfig::budget)
      .def_readwrite("beta", &SimulationConfig::beta)
      .def_readwrite("epsilon", &SimulationConfig::epsilon)
      .def_readwrite("seed", &SimulationConfig::seed)
      .def_readwrite("max_periods", &SimulationConfig::max_periods)
      .def_readonly("initial", &SimulationConfig::initial)
      .def_readonly("targets", &SimulationConfig::targets)
      .def("to_json", [](const SimulationConfig& c) { return c.to_json().dump(); });

  py::class_<SimulationTrace>(m, "SimulationTrace")
      .def_readonly("indicators", &SimulationTrace::indicators)
      .def_readonly("allocations", &SimulationTrace::allocations)
      .def_readonly("contributions", &SimulationTrace::contributions)
      .def_readonly("supervision", &SimulationTrace::supervision)
      .def_readonly("periods", &SimulationTrace::periods)
      .def_readonly("converged", &SimulationTrace::converged)
      .def_readonly("total_diversion", &SimulationTrace::total_diversion);

  m.def("governance_map", &governance_map, py::arg("level"));
  m.def("run_simulation", &run_simulation, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("expected_profile",
        [](const SimulationConfig& config, int n_runs, std::uint64_t seed) {
          py::gil_scoped_release release;
          const ProfileSamples samples = expected_profile(config, n_runs, seed);
          auto runs = run_shares(samples);
          py::gil_scoped_acquire acquire;
          return py::make_tuple(samples.mean.shares, runs);
        },
        py::arg("config"), py::arg("n_runs"), py::arg("seed"));

  m.def("empirical_corruption", &empirical_corruption, py::arg("panel"),
        py::arg("country"));
  m.def("simulated_corruption", &simulated_corruption, py::arg("config"),
        py::arg("n_runs"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("config_for_country", &config_for_country, py::arg("panel"),
        py::arg("network"), py::arg("country"), py::arg("gamma"));

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("gamma", &CalibrationResult::gamma)
      .def_readonly("clusters", &CalibrationResult::clusters)
      .def_readonly("loss", &CalibrationResult::loss)
      .def_readonly("empirical", &CalibrationResult::empirical)
      .def_readonly("simulated", &CalibrationResult::simulated)
      .def_readonly("loss_by_k", &CalibrationResult::loss_by_k)
      .def("to_json", [](const CalibrationResult& r) { return r.to_json().dump(); });

  m.def("fit_gamma",
        [](const IndicatorPanel& panel,
           const std::map<std::string, SpilloverNetwork>& networks,
           const std::vector<std::string>& countries, int k_max, int n_runs,
           std::uint64_t seed) {
          CalibrationOptions options;
          options.k_max = k_max;
          options.n_runs = n_runs;
          options.seed = seed;
          py::gil_scoped_release release;
          return fit_gamma(panel, networks, countries, options);
        },
        py::arg("panel"), py::arg("networks"), py::arg("countries"),
        py::arg("k_max") = 8, py::arg("n_runs") = 100, py::arg("seed") = 0);

  py::class_<CoherenceResult>(m, "CoherenceResult")
      .def_readonly("h", &CoherenceResult::h)
      .def_readonly("h_samples", &CoherenceResult::h_samples)
      .def_readonly("p_value", &CoherenceResult::p_value)
      .def_readonly("stars", &CoherenceResult::stars)
      .def_readonly("diffs", &CoherenceResult::diffs);

  m.def("retrospective_profile",
        [](const IndicatorPanel& panel, const SpilloverNetwork& network,
           const std::string& country, double gamma, int n_runs,
           std::uint64_t seed) {
          py::gil_scoped_release release;
          const ProfileSamples samples =
              retrospective_profile(panel, network, country, gamma, n_runs, seed);
          auto runs = run_shares(samples);
          py::gil_scoped_acquire acquire;
          return py::make_tuple(samples.mean.shares, runs);
        },
        py::arg("panel"), py::arg("network"), py::arg("country"),
        py::arg("gamma"), py::arg("n_runs"), py::arg("seed"));
  m.def("consistent_profile",
        [](const IndicatorPanel& panel, const SpilloverNetwork& network,
           const std::string& country, const std::string& mode, double gamma,
           int n_runs, std::uint64_t seed) {
          py::gil_scoped_release release;
          const ProfileSamples samples = consistent_profile(
              panel, network, country, mode, gamma, n_runs, seed);
          auto runs = run_shares(samples);
          py::gil_scoped_acquire acquire;
          return py::make_tuple(samples.mean.shares, runs);
        },
        py::arg("panel"), py::arg("network"), py::arg("country"), py::arg("mode"),
        py::arg("gamma"), py::arg("n_runs"), py::arg("seed"));
  m.def("inconsistent_profile",
        [](const std::vector<double>& shares) {
          return inconsistent_profile(make_profile(shares)).shares;
        },
        py::arg("shares"));
  m.def("distance",
        [](const std::vector<double>& x, const std::vector<double>& y,
           const std::string& metric) {
          return distance(x, y, metric_from_name(metric));
        },
        py::arg("x"), py::arg("y"), py::arg("metric") = "l1");
  m.def("coherence_index",
        [](const std::vector<double>& p, const std::vector<double>& q,
           const std::vector<double>& r, const std::string& metric) {
          return coherence_index(make_profile(p), make_profile(q),
                                 make_profile(r), metric_from_name(metric));
        },
        py::arg("retrospective"), py::arg("consistent"), py::arg("inconsistent"),
        py::arg("metric") = "l1");
  m.def("coherence_with_significance",
        [](const std::vector<std::vector<double>>& p_runs,
           const std::vector<std::vector<double>>& q_runs,
           const std::string& metric) {
          std::vector<AllocationProfile> p, q;
          for (const auto& shares : p_runs) p.push_back(make_profile(shares));
          for (const auto& shares : q_runs) q.push_back(make_profile(shares));
          return coherence_with_significance(p, q, metric_from_name(metric));
        },
        py::arg("retrospective_runs"), py::arg("consistent_runs"),
        py::arg("metric") = "l1");
  m.def("allocative_inefficiencies",
        [](const std::vector<double>& p, const std::vector<double>& q) {
          return allocative_inefficiencies(make_profile(p), make_profile(q));
        },
        py::arg("retrospective"), py::arg("consistent"));
  m.def("indicator_similarity", &indicator_similarity, py::arg("panel"),
        py::arg("country"), py::arg("mode"));
}
