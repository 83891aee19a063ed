#include "ppi/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "ppi/rng.hpp"

namespace ppi {

namespace fs = std::filesystem;

namespace {

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

std::string cell_file_name(const std::string& country, const std::string& mode) {
  return "cell_" + sanitize(country) + "__" + sanitize(mode) + ".json";
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ZeroVariance("constant series has no correlation");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& doc) {
  try {
    ExperimentSpec spec;
    spec.panel_path = doc.at("panel").get<std::string>();
    spec.meta_path = doc.value("meta", std::string{});
    spec.countries = doc.at("countries").get<std::vector<std::string>>();
    if (doc.at("modes").is_string())
      spec.modes = {doc.at("modes").get<std::string>()};
    else
      spec.modes = doc.at("modes").get<std::vector<std::string>>();
    spec.runs = doc.value("runs", 200);
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.metric = doc.value("metric", std::string{"l1"});
    if (doc.contains("calibration"))
      spec.calibration_path = doc.at("calibration").get<std::string>();
    if (doc.contains("gamma")) spec.fixed_gamma = doc.at("gamma").get<double>();
    spec.out_dir = doc.value("out", std::string{});
    if (spec.runs < 1) throw DegenerateInput("runs must be >= 1");
    if (!spec.calibration_path && !spec.fixed_gamma)
      throw DegenerateInput("spec needs either a calibration file or a fixed gamma");
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad experiment spec: ") + e.what());
  }
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad experiment spec: ") + e.what());
  }
  return from_json(doc);
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json doc;
  doc["panel"] = panel_path;
  if (!meta_path.empty()) doc["meta"] = meta_path;
  doc["countries"] = countries;
  doc["modes"] = modes;
  doc["runs"] = runs;
  doc["seed"] = seed;
  doc["metric"] = metric;
  if (calibration_path) doc["calibration"] = *calibration_path;
  if (fixed_gamma) doc["gamma"] = *fixed_gamma;
  if (!out_dir.empty()) doc["out"] = out_dir;
  return doc;
}

nlohmann::json GridCell::to_json() const {
  nlohmann::json doc = result.to_json();
  doc["country"] = country;
  doc["mode"] = mode;
  doc["mean_retrospective"] = mean_retrospective;
  doc["mean_consistent"] = mean_consistent;
  return doc;
}

GridCell GridCell::from_json(const nlohmann::json& doc) {
  try {
    GridCell cell;
    cell.country = doc.at("country").get<std::string>();
    cell.mode = doc.at("mode").get<std::string>();
    cell.result = CoherenceResult::from_json(doc);
    cell.mean_retrospective = doc.at("mean_retrospective").get<std::vector<double>>();
    cell.mean_consistent = doc.at("mean_consistent").get<std::vector<double>>();
    return cell;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad cell json: ") + e.what());
  }
}

const GridCell& CoherenceGrid::cell(const std::string& country,
                                    const std::string& mode) const {
  auto it = cells.find({country, mode});
  if (it == cells.end())
    throw MissingCell("no grid cell for " + country + " x " + mode);
  return it->second;
}

bool CoherenceGrid::has_cell(const std::string& country,
                             const std::string& mode) const {
  return cells.find({country, mode}) != cells.end();
}

std::map<std::string, std::string> CoherenceGrid::best_mode_per_country() const {
  std::map<std::string, std::string> best;
  for (const auto& country : countries) {
    double best_h = -2.0;
    std::string best_mode;
    for (const auto& mode : modes) {
      auto it = cells.find({country, mode});
      if (it == cells.end()) continue;
      // strict comparison: the earliest mode in mode order wins ties
      if (it->second.result.h > best_h) {
        best_h = it->second.result.h;
        best_mode = mode;
      }
    }
    if (!best_mode.empty()) best[country] = best_mode;
  }
  return best;
}

std::map<std::string, double> CoherenceGrid::average_h_per_mode() const {
  std::map<std::string, double> averages;
  for (const auto& mode : modes) {
    double sum = 0.0;
    int count = 0;
    for (const auto& country : countries) {
      auto it = cells.find({country, mode});
      if (it == cells.end()) continue;
      sum += it->second.result.h;
      ++count;
    }
    if (count > 0) averages[mode] = sum / count;
  }
  return averages;
}

nlohmann::json CoherenceGrid::to_json() const {
  nlohmann::json doc;
  doc["countries"] = countries;
  doc["modes"] = modes;
  nlohmann::json cell_list = nlohmann::json::array();
  for (const auto& [key, cell] : cells) cell_list.push_back(cell.to_json());
  doc["cells"] = cell_list;
  return doc;
}

CoherenceGrid CoherenceGrid::from_json(const nlohmann::json& doc) {
  try {
    CoherenceGrid grid;
    grid.countries = doc.at("countries").get<std::vector<std::string>>();
    grid.modes = doc.at("modes").get<std::vector<std::string>>();
    for (const auto& entry : doc.at("cells")) {
      GridCell cell = GridCell::from_json(entry);
      grid.cells[{cell.country, cell.mode}] = std::move(cell);
    }
    return grid;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad grid json: ") + e.what());
  }
}

CoherenceGrid run_grid(const ExperimentSpec& spec, const IndicatorPanel& panel,
                       int n_jobs) {
  CoherenceGrid grid;
  grid.countries = spec.countries;
  grid.modes = spec.modes;
  if (grid.modes.size() == 1 &&
      (grid.modes[0] == "early" || grid.modes[0] == "OECD"))
    grid.modes = panel.early_members();
  if (grid.countries.empty() || grid.modes.empty())
    throw DegenerateInput("grid needs countries and modes");
  for (const auto& c : grid.countries) panel.country_index(c);
  for (const auto& m : grid.modes) panel.country_index(m);

  std::map<std::string, double> gamma;
  if (spec.calibration_path) {
    const CalibrationResult calibration = load_calibration(*spec.calibration_path);
    for (const auto& country : grid.countries) {
      auto it = calibration.gamma.find(country);
      if (it == calibration.gamma.end())
        throw DegenerateInput("calibration has no gamma for " + country);
      gamma[country] = it->second;
    }
  } else {
    for (const auto& country : grid.countries) gamma[country] = *spec.fixed_gamma;
  }

  const DistanceMetric metric = metric_from_name(spec.metric);
  const bool persist = !spec.out_dir.empty();
  if (persist) fs::create_directories(spec.out_dir);

  // load any cells persisted by an earlier (possibly interrupted) run
  struct Job {
    std::string country;
    std::string mode;
  };
  std::vector<Job> jobs;
  for (const auto& country : grid.countries)
    for (const auto& mode : grid.modes) {
      if (mode == country) continue;  // a country cannot be its own mode
      if (persist) {
        const fs::path path = fs::path(spec.out_dir) / cell_file_name(country, mode);
        if (fs::exists(path)) {
          std::ifstream in(path);
          nlohmann::json doc;
          in >> doc;
          GridCell cell = GridCell::from_json(doc);
          grid.cells[{cell.country, cell.mode}] = std::move(cell);
          continue;
        }
      }
      jobs.push_back({country, mode});
    }

  // shared per-country inputs for the remaining cells
  std::map<std::string, SpilloverNetwork> networks;
  std::map<std::string, ProfileSamples> retrospective;
  for (const auto& job : jobs) {
    if (networks.count(job.country)) continue;
    networks.emplace(job.country, estimate_network(panel, job.country));
    retrospective.emplace(
        job.country,
        retrospective_profile(panel, networks.at(job.country), job.country,
                              gamma.at(job.country), spec.runs,
                              derive_cell_seed(spec.seed, job.country,
                                               "__retrospective__")));
  }

  std::vector<GridCell> computed(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) break;
      try {
        const Job& job = jobs[k];
        const ProfileSamples consistent = consistent_profile(
            panel, networks.at(job.country), job.country, job.mode,
            gamma.at(job.country), spec.runs,
            derive_cell_seed(spec.seed, job.country, job.mode));
        const ProfileSamples& retro = retrospective.at(job.country);
        GridCell cell;
        cell.country = job.country;
        cell.mode = job.mode;
        cell.result = coherence_with_significance(retro.runs, consistent.runs, metric);
        cell.mean_retrospective = retro.mean.shares;
        cell.mean_consistent = consistent.mean.shares;
        computed[k] = std::move(cell);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const int thread_count = std::max(1, std::min<int>(n_jobs, static_cast<int>(jobs.size())));
  std::vector<std::thread> threads;
  for (int t = 1; t < thread_count; ++t) threads.emplace_back(worker);
  worker();
  for (auto& thread : threads) thread.join();
  if (failure) std::rethrow_exception(failure);

  for (auto& cell : computed) {
    if (persist) {
      const fs::path path =
          fs::path(spec.out_dir) / cell_file_name(cell.country, cell.mode);
      write_text(path.string(), cell.to_json().dump(2) + "\n");
    }
    grid.cells[{cell.country, cell.mode}] = std::move(cell);
  }
  return grid;
}

CoherenceGrid run_grid(const ExperimentSpec& spec, int n_jobs) {
  const bool canonical = spec.meta_path.empty();
  const IndicatorPanel panel = canonical ? load_panel_json(spec.panel_path)
                                         : load_panel(spec.panel_path, spec.meta_path);
  return run_grid(spec, panel, n_jobs);
}

double mode_performance_correlation(const CoherenceGrid& grid,
                                    const IndicatorPanel& panel,
                                    PerformanceMeasure measure) {
  const auto averages = grid.average_h_per_mode();
  if (averages.size() < 3)
    throw TooFewModes("need at least 3 modes for a correlation");
  std::vector<double> h_values, performance;
  for (const auto& mode : grid.modes) {
    auto it = averages.find(mode);
    if (it == averages.end()) continue;
    h_values.push_back(it->second);
    performance.push_back(measure == PerformanceMeasure::kIncomePerCapita
                              ? panel.meta(mode).income_per_capita
                              : panel.mean_indicator_level(mode));
  }
  return pearson(performance, h_values);
}

std::vector<std::pair<double, double>> similarity_vs_coherence(
    const std::string& country, const std::vector<std::string>& modes,
    const CoherenceGrid& grid, const IndicatorPanel& panel) {
  std::vector<std::pair<double, double>> pairs;
  for (const auto& mode : modes)
    pairs.emplace_back(indicator_similarity(panel, country, mode),
                       grid.cell(country, mode).result.h);
  return pairs;
}

std::vector<std::string> emit_report(const CoherenceGrid& grid,
                                     const IndicatorPanel& panel,
                                     ReportFormat format,
                                     const std::string& out_dir) {
  if (grid.cells.empty()) throw DegenerateInput("cannot report an empty grid");
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    const std::string path = (fs::path(out_dir) / name).string();
    write_text(path, text);
    written.push_back(path);
  };

  if (format == ReportFormat::kJson) {
    emit("grid.json", grid.to_json().dump(2) + "\n");
    return written;
  }

  // index table: modes as rows, countries as columns, stars appended
  {
    std::string csv = "mode";
    for (const auto& country : grid.countries) csv += "," + country;
    csv += "\n";
    for (const auto& mode : grid.modes) {
      csv += mode;
      for (const auto& country : grid.countries) {
        csv += ",";
        if (grid.has_cell(country, mode)) {
          const auto& result = grid.cell(country, mode).result;
          csv += format_number(result.h) + result.stars;
        }
      }
      csv += "\n";
    }
    std::string footer = "average";
    for (const auto& country : grid.countries) {
      double sum = 0.0;
      int count = 0;
      for (const auto& mode : grid.modes)
        if (grid.has_cell(country, mode)) {
          sum += grid.cell(country, mode).result.h;
          ++count;
        }
      footer += ",";
      if (count > 0) footer += format_number(sum / count);
    }
    csv += footer + "\n";
    emit("index_table.csv", csv);
  }

  // per-mode average coherence against both performance measures
  {
    std::string csv = "mode,average_h,income_per_capita,mean_indicators\n";
    const auto averages = grid.average_h_per_mode();
    for (const auto& mode : grid.modes) {
      auto it = averages.find(mode);
      if (it == averages.end()) continue;
      csv += mode + "," + format_number(it->second) + "," +
             format_number(panel.meta(mode).income_per_capita) + "," +
             format_number(panel.mean_indicator_level(mode)) + "\n";
    }
    emit("mode_averages.csv", csv);
  }

  // per-country series: coherence by mode, similarity, inefficiencies
  for (const auto& country : grid.countries) {
    std::string csv = "mode,h,p_value,stars,similarity\n";
    for (const auto& mode : grid.modes) {
      if (!grid.has_cell(country, mode)) continue;
      const auto& result = grid.cell(country, mode).result;
      csv += mode + "," + format_number(result.h) + "," +
             format_number(result.p_value) + "," + result.stars + "," +
             format_number(indicator_similarity(panel, country, mode)) + "\n";
    }
    emit("coherence_" + sanitize(country) + ".csv", csv);
  }
  for (const auto& [key, cell] : grid.cells) {
    std::string csv = "indicator,pillar,diff\n";
    for (std::size_t i = 0; i < cell.result.diffs.size(); ++i)
      csv += panel.indicators()[i].id + "," +
             std::to_string(panel.indicators()[i].pillar) + "," +
             format_number(cell.result.diffs[i]) + "\n";
    emit("inefficiencies_" + sanitize(cell.country) + "__" + sanitize(cell.mode) +
             ".csv",
         csv);
  }

  // pillar x group means when the panel records a reference country
  if (!panel.reference().empty()) {
    try {
      const CountryGroups groups = classify_groups(
          panel, panel.reference(),
          {panel.early_members().begin(), panel.early_members().end()});
      const PillarMeans means = pillar_means(panel, groups, panel.years().front(),
                                             panel.years().back());
      std::string csv = "pillar,group1,group2,group3,group4\n";
      for (std::size_t p = 0; p < means.pillars.size(); ++p) {
        csv += std::to_string(means.pillars[p]);
        for (int g = 0; g < 4; ++g) csv += "," + format_number(means.means(p, g));
        csv += "\n";
      }
      emit("pillar_means.csv", csv);
    } catch (const EmptyGroup&) {
      // grouping is degenerate for this panel; skip the series
    }
  }
  return written;
}

}  // namespace ppi
