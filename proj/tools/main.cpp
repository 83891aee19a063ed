#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppi/calibration.hpp"
#include "ppi/coherence.hpp"
#include "ppi/engine.hpp"
#include "ppi/experiment.hpp"
#include "ppi/network.hpp"
#include "ppi/panel.hpp"
#include "ppi/rng.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

ppi::IndicatorPanel load_any_panel(const std::string& panel_path,
                                   const std::string& meta_path) {
  if (meta_path.empty()) return ppi::load_panel_json(panel_path);
  return ppi::load_panel(panel_path, meta_path);
}

std::vector<std::string> resolve_modes(const ppi::IndicatorPanel& panel,
                                       const std::string& modes) {
  if (modes == "early" || modes == "OECD") return panel.early_members();
  return split_list(modes);
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw ppi::IoError("cannot write " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy priority inference pipeline"};
  app.require_subcommand(1);

  std::string panel_path, meta_path, out_path, country, pool, modes, metric = "l1";
  std::string config_path, spec_path, calibration_path, grid_dir, format = "csv";
  std::uint64_t seed = 0;
  int runs = 200, k_max = 8, jobs = 1;
  int synth_countries = 6, synth_indicators = 10, synth_years = 11;
  double gamma = 0.5;
  std::string countries_list;

  auto* ingest = app.add_subcommand("ingest", "Validate a panel and write its canonical JSON dump");
  ingest->add_option("--panel", panel_path, "long-format CSV")->required();
  ingest->add_option("--meta", meta_path, "JSON metadata sidecar")->required();
  ingest->add_option("--out", out_path, "output panel JSON")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic panel (CSV + metadata)");
  synth->add_option("--countries", synth_countries, "number of countries");
  synth->add_option("--indicators", synth_indicators, "number of indicators");
  synth->add_option("--years", synth_years, "number of years");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", out_path, "output directory")->required();

  auto* estimate = app.add_subcommand("estimate-network", "Estimate a country's spillover network");
  estimate->add_option("--panel", panel_path)->required();
  estimate->add_option("--meta", meta_path);
  estimate->add_option("--country", country)->required();
  estimate->add_option("--pool", pool, "comma-separated countries whose series are pooled in");
  estimate->add_option("--out", out_path, "output network JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "Run the allocation game from a config file");
  simulate->add_option("--config", config_path, "simulation config JSON")->required();
  simulate->add_option("--runs", runs, "Monte Carlo runs (1 dumps the full trace)");
  simulate->add_option("--seed", seed, "master seed");
  simulate->add_option("--out", out_path)->required();

  auto* calibrate = app.add_subcommand("calibrate", "Fit policy-quality values to observed corruption");
  calibrate->add_option("--panel", panel_path)->required();
  calibrate->add_option("--meta", meta_path);
  calibrate->add_option("--countries", countries_list, "subset to calibrate (default: all)");
  calibrate->add_option("--kmax", k_max, "maximum cluster count");
  calibrate->add_option("--runs", runs, "Monte Carlo runs per evaluation");
  calibrate->add_option("--seed", seed);
  calibrate->add_option("--out", out_path)->required();

  auto* coherence = app.add_subcommand("coherence", "Coherence of one country against one or more modes");
  coherence->add_option("--panel", panel_path)->required();
  coherence->add_option("--meta", meta_path);
  coherence->add_option("--country", country)->required();
  coherence->add_option("--modes", modes, "comma-separated modes, or 'early'")->required();
  coherence->add_option("--metric", metric, "l1|cosine|correlation|euclidean");
  coherence->add_option("--runs", runs);
  coherence->add_option("--seed", seed);
  coherence->add_option("--gamma", gamma, "fixed policy quality");
  coherence->add_option("--calibration", calibration_path, "calibration JSON (overrides --gamma)");
  coherence->add_option("--out", out_path, "output directory")->required();

  auto* grid = app.add_subcommand("grid", "Run a full country x mode experiment");
  grid->add_option("--spec", spec_path, "experiment spec JSON")->required();
  grid->add_option("--out", grid_dir, "output directory (overrides the spec)");
  grid->add_option("--jobs", jobs, "parallel cell workers");

  auto* report = app.add_subcommand("report", "Emit aggregate tables and figure data for a grid");
  report->add_option("--grid", grid_dir, "grid output directory")->required();
  report->add_option("--spec", spec_path, "experiment spec JSON")->required();
  report->add_option("--format", format, "csv|json");
  report->add_option("--out", out_path, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto panel = ppi::load_panel(panel_path, meta_path);
      ppi::save_panel(panel, out_path);
      std::cout << "wrote " << out_path << " (" << panel.n_countries()
                << " countries, " << panel.n_indicators() << " indicators, "
                << panel.n_years() << " years)\n";
    } else if (*synth) {
      const auto panel = ppi::generate_synthetic_panel(
          synth_countries, synth_indicators, synth_years, seed);
      std::filesystem::create_directories(out_path);
      const auto csv_path = std::filesystem::path(out_path) / "panel.csv";
      const auto meta_out = std::filesystem::path(out_path) / "meta.json";
      std::ofstream csv(csv_path);
      csv << "country,indicator,year,value\n";
      for (int c = 0; c < panel.n_countries(); ++c)
        for (int i = 0; i < panel.n_indicators(); ++i)
          for (int y = 0; y < panel.n_years(); ++y) {
            char value[32];
            std::snprintf(value, sizeof(value), "%.17g", panel.value(c, i, y));
            csv << panel.countries()[c] << ',' << panel.indicators()[i].id << ','
                << panel.years()[y] << ',' << value << "\n";
          }
      nlohmann::json meta;
      meta["roles"] = panel.roles();
      nlohmann::json pillars, adjusted, meta_countries;
      for (const auto& ind : panel.indicators()) {
        pillars[ind.id] = ind.pillar;
        adjusted[ind.id] = ind.direction_adjusted;
      }
      for (const auto& code : panel.countries())
        meta_countries[code] = {
            {"income_per_capita", panel.meta(code).income_per_capita},
            {"budget_fraction", panel.meta(code).budget_fraction}};
      meta["pillars"] = pillars;
      meta["direction_adjusted"] = adjusted;
      meta["countries"] = meta_countries;
      meta["early_members"] = panel.early_members();
      meta["reference"] = panel.reference();
      write_json(meta_out.string(), meta);
      std::cout << "wrote " << csv_path.string() << " and " << meta_out.string()
                << "\n";
    } else if (*estimate) {
      const auto panel = load_any_panel(panel_path, meta_path);
      const auto network = ppi::estimate_network(panel, country, split_list(pool));
      std::vector<std::string> names;
      for (const auto& ind : panel.indicators()) names.push_back(ind.id);
      ppi::save_network(network, out_path, names);
      int edges = 0;
      for (int d : network.degrees) edges += d;
      std::cout << "wrote " << out_path << " (" << network.size() << " nodes, "
                << edges / 2 << " edges)\n";
    } else if (*simulate) {
      std::ifstream in(config_path);
      if (!in) throw ppi::MalformedFile("cannot open " + config_path);
      nlohmann::json doc;
      in >> doc;
      auto config = ppi::SimulationConfig::from_json(doc);
      if (runs <= 1) {
        if (simulate->count("--seed")) config.seed = seed;
        const auto trace = ppi::run_simulation(config);
        write_json(out_path, trace.to_json());
        std::cout << "wrote " << out_path << " (periods=" << trace.periods
                  << " converged=" << (trace.converged ? "yes" : "no")
                  << " diversion=" << trace.total_diversion << ")\n";
      } else {
        const auto samples = ppi::expected_profile(config, runs, seed);
        nlohmann::json out_doc;
        out_doc["mean_profile"] = samples.mean.shares;
        nlohmann::json run_list = nlohmann::json::array();
        for (const auto& run : samples.runs) run_list.push_back(run.shares);
        out_doc["runs"] = run_list;
        write_json(out_path, out_doc);
        std::cout << "wrote " << out_path << " (" << runs << " runs)\n";
      }
    } else if (*calibrate) {
      const auto panel = load_any_panel(panel_path, meta_path);
      std::vector<std::string> targets = countries_list.empty()
                                             ? panel.countries()
                                             : split_list(countries_list);
      std::map<std::string, ppi::SpilloverNetwork> networks;
      for (const auto& code : targets)
        networks.emplace(code, ppi::estimate_network(panel, code));
      ppi::CalibrationOptions options;
      options.k_max = k_max;
      options.n_runs = runs;
      options.seed = seed;
      const auto result = ppi::fit_gamma(panel, networks, targets, options);
      ppi::save_calibration(result, out_path);
      std::cout << "wrote " << out_path << " (" << result.clusters.size()
                << " clusters, loss=" << result.loss << ")\n";
    } else if (*coherence) {
      const auto panel = load_any_panel(panel_path, meta_path);
      ppi::ExperimentSpec spec;
      spec.countries = {country};
      spec.modes = resolve_modes(panel, modes);
      spec.runs = runs;
      spec.seed = seed;
      spec.metric = metric;
      if (!calibration_path.empty())
        spec.calibration_path = calibration_path;
      else
        spec.fixed_gamma = gamma;
      spec.out_dir = out_path;
      const auto result = ppi::run_grid(spec, panel, jobs);
      for (const auto& mode : result.modes)
        if (result.has_cell(country, mode)) {
          const auto& cell = result.cell(country, mode).result;
          std::cout << country << " vs " << mode << ": h=" << cell.h
                    << cell.stars << " (p=" << cell.p_value << ")\n";
        }
    } else if (*grid) {
      auto spec = ppi::ExperimentSpec::load(spec_path);
      if (!grid_dir.empty()) spec.out_dir = grid_dir;
      const auto result = ppi::run_grid(spec, jobs);
      std::cout << "grid complete: " << result.cells.size() << " cells in "
                << spec.out_dir << "\n";
    } else if (*report) {
      auto spec = ppi::ExperimentSpec::load(spec_path);
      spec.out_dir = grid_dir;
      const auto panel = spec.meta_path.empty()
                             ? ppi::load_panel_json(spec.panel_path)
                             : ppi::load_panel(spec.panel_path, spec.meta_path);
      // reuse persisted cells; nothing is recomputed when the grid is complete
      const auto result = ppi::run_grid(spec, panel, jobs);
      const auto fmt = format == "json" ? ppi::ReportFormat::kJson
                                        : ppi::ReportFormat::kCsv;
      const auto files = ppi::emit_report(result, panel, fmt, out_path);
      for (const auto& file : files) std::cout << "wrote " << file << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
