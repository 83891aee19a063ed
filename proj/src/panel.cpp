#include "ppi/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ppi/rng.hpp"

namespace ppi {

namespace {

bool finite01(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

IndicatorPanel::IndicatorPanel(std::vector<std::string> countries,
                               std::vector<IndicatorInfo> indicators,
                               std::vector<int> years,
                               std::vector<double> values,
                               std::map<std::string, std::string> roles,
                               std::map<std::string, CountryMeta> country_meta,
                               std::vector<std::string> early_members,
                               std::string reference)
    : countries_(std::move(countries)),
      indicators_(std::move(indicators)),
      years_(std::move(years)),
      values_(std::move(values)),
      roles_(std::move(roles)),
      country_meta_(std::move(country_meta)),
      early_members_(std::move(early_members)),
      reference_(std::move(reference)) {
  for (int c = 0; c < n_countries(); ++c) country_lookup_[countries_[c]] = c;
  for (int i = 0; i < n_indicators(); ++i) indicator_lookup_[indicators_[i].id] = i;
  validate();
}

void IndicatorPanel::validate() const {
  if (countries_.empty() || indicators_.empty())
    throw MalformedFile("panel has no countries or no indicators");
  if (years_.size() < 2) throw MalformedFile("panel needs at least two years");
  for (std::size_t t = 1; t < years_.size(); ++t)
    if (years_[t] <= years_[t - 1])
      throw MalformedFile("year list must be strictly increasing");
  if (country_lookup_.size() != countries_.size())
    throw MalformedFile("duplicate country code");
  if (indicator_lookup_.size() != indicators_.size())
    throw MalformedFile("duplicate indicator id");

  const std::size_t expected =
      countries_.size() * indicators_.size() * years_.size();
  if (values_.size() != expected)
    throw MalformedFile("panel value array has wrong size (missing cells?)");

  for (int c = 0; c < n_countries(); ++c)
    for (int i = 0; i < n_indicators(); ++i)
      for (int y = 0; y < n_years(); ++y)
        if (!finite01(value(c, i, y)))
          throw ValueOutOfRange("value out of [0,1] at country=" + countries_[c] +
                                " indicator=" + indicators_[i].id +
                                " year=" + std::to_string(years_[y]));

  for (const char* role :
       {kRuleOfLawRole, kControlOfCorruptionRole, kDiversionOfFundsRole}) {
    auto it = roles_.find(role);
    if (it == roles_.end())
      throw MissingRole(std::string("missing role mapping: ") + role);
    if (indicator_lookup_.find(it->second) == indicator_lookup_.end())
      throw MissingRole(std::string("role ") + role +
                        " maps to unknown indicator " + it->second);
  }

  for (const auto& country : countries_) {
    auto it = country_meta_.find(country);
    if (it == country_meta_.end())
      throw MalformedFile("missing metadata for country " + country);
    const auto& m = it->second;
    if (!std::isfinite(m.income_per_capita) || m.income_per_capita < 0.0)
      throw MalformedFile("invalid income per capita for " + country);
    if (!std::isfinite(m.budget_fraction) || m.budget_fraction <= 0.0 ||
        m.budget_fraction > 1.0)
      throw MalformedFile("budget fraction must be in (0,1] for " + country);
  }
  for (const auto& early : early_members_)
    if (country_lookup_.find(early) == country_lookup_.end())
      throw UnknownCountry("early member " + early + " not in panel");
  if (!reference_.empty() &&
      country_lookup_.find(reference_) == country_lookup_.end())
    throw UnknownCountry("reference country " + reference_ + " not in panel");
}

int IndicatorPanel::country_index(const std::string& code) const {
  auto it = country_lookup_.find(code);
  if (it == country_lookup_.end()) throw UnknownCountry("unknown country " + code);
  return it->second;
}

int IndicatorPanel::indicator_index(const std::string& id) const {
  auto it = indicator_lookup_.find(id);
  if (it == indicator_lookup_.end())
    throw MalformedFile("unknown indicator " + id);
  return it->second;
}

int IndicatorPanel::role_index(const std::string& role) const {
  auto it = roles_.find(role);
  if (it == roles_.end()) throw MissingRole("missing role mapping: " + role);
  return indicator_index(it->second);
}

const CountryMeta& IndicatorPanel::meta(const std::string& country) const {
  auto it = country_meta_.find(country);
  if (it == country_meta_.end()) throw UnknownCountry("unknown country " + country);
  return it->second;
}

Eigen::MatrixXd IndicatorPanel::series(const std::string& country) const {
  const int c = country_index(country);
  Eigen::MatrixXd out(n_years(), n_indicators());
  for (int y = 0; y < n_years(); ++y)
    for (int i = 0; i < n_indicators(); ++i) out(y, i) = value(c, i, y);
  return out;
}

Eigen::VectorXd IndicatorPanel::first_year_values(const std::string& country) const {
  const int c = country_index(country);
  Eigen::VectorXd out(n_indicators());
  for (int i = 0; i < n_indicators(); ++i) out[i] = value(c, i, 0);
  return out;
}

Eigen::VectorXd IndicatorPanel::last_year_values(const std::string& country) const {
  const int c = country_index(country);
  Eigen::VectorXd out(n_indicators());
  for (int i = 0; i < n_indicators(); ++i) out[i] = value(c, i, n_years() - 1);
  return out;
}

double IndicatorPanel::mean_indicator_level(const std::string& country) const {
  const int c = country_index(country);
  double sum = 0.0;
  for (int i = 0; i < n_indicators(); ++i)
    for (int y = 0; y < n_years(); ++y) sum += value(c, i, y);
  return sum / (static_cast<double>(n_indicators()) * n_years());
}

std::vector<int> IndicatorPanel::pillar_ids() const {
  std::set<int> ids;
  for (const auto& ind : indicators_) ids.insert(ind.pillar);
  return {ids.begin(), ids.end()};
}

nlohmann::json IndicatorPanel::to_json() const {
  nlohmann::json doc;
  doc["countries"] = countries_;
  nlohmann::json inds = nlohmann::json::array();
  for (const auto& ind : indicators_)
    inds.push_back({{"id", ind.id},
                    {"pillar", ind.pillar},
                    {"direction_adjusted", ind.direction_adjusted}});
  doc["indicators"] = inds;
  doc["years"] = years_;
  doc["values"] = values_;
  doc["roles"] = roles_;
  nlohmann::json meta;
  for (const auto& [code, m] : country_meta_)
    meta[code] = {{"income_per_capita", m.income_per_capita},
                  {"budget_fraction", m.budget_fraction}};
  doc["country_meta"] = meta;
  doc["early_members"] = early_members_;
  doc["reference"] = reference_;
  return doc;
}

IndicatorPanel IndicatorPanel::from_json(const nlohmann::json& doc) {
  try {
    std::vector<IndicatorInfo> indicators;
    for (const auto& ind : doc.at("indicators"))
      indicators.push_back({ind.at("id").get<std::string>(),
                            ind.at("pillar").get<int>(),
                            ind.value("direction_adjusted", true)});
    std::map<std::string, CountryMeta> meta;
    for (const auto& [code, m] : doc.at("country_meta").items())
      meta[code] = {m.at("income_per_capita").get<double>(),
                    m.at("budget_fraction").get<double>()};
    return IndicatorPanel(
        doc.at("countries").get<std::vector<std::string>>(), std::move(indicators),
        doc.at("years").get<std::vector<int>>(),
        doc.at("values").get<std::vector<double>>(),
        doc.at("roles").get<std::map<std::string, std::string>>(), std::move(meta),
        doc.value("early_members", std::vector<std::string>{}),
        doc.value("reference", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad panel json: ") + e.what());
  }
}

IndicatorPanel load_panel(const std::string& csv_path,
                          const std::string& meta_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw MalformedFile("cannot open " + csv_path);
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw MalformedFile("cannot open " + meta_path);

  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile("bad metadata json: " + std::string(e.what()));
  }

  std::string line;
  if (!std::getline(csv, line)) throw MalformedFile("empty csv " + csv_path);
  auto header = split_csv_line(line);
  const std::vector<std::string> wanted = {"country", "indicator", "year", "value"};
  std::vector<int> col(wanted.size(), -1);
  for (std::size_t w = 0; w < wanted.size(); ++w) {
    for (std::size_t h = 0; h < header.size(); ++h)
      if (header[h] == wanted[w]) col[w] = static_cast<int>(h);
    if (col[w] < 0)
      throw MalformedFile("csv header lacks column '" + wanted[w] + "'");
  }

  // collect cells; country/indicator/year orderings follow first appearance
  std::vector<std::string> countries;
  std::vector<std::string> indicator_ids;
  std::set<int> year_set;
  std::map<std::tuple<std::string, std::string, int>, double> cells;
  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    auto fields = split_csv_line(line);
    if (fields.size() < header.size())
      throw MalformedFile("short row at line " + std::to_string(line_no));
    const std::string& country = fields[col[0]];
    const std::string& indicator = fields[col[1]];
    int year = 0;
    double value = 0.0;
    try {
      year = std::stoi(fields[col[2]]);
      value = std::stod(fields[col[3]]);
    } catch (const std::exception&) {
      throw MalformedFile("unparsable row at line " + std::to_string(line_no));
    }
    if (!finite01(value))
      throw ValueOutOfRange("value " + fields[col[3]] + " out of [0,1] at country=" +
                            country + " indicator=" + indicator +
                            " year=" + std::to_string(year));
    if (std::find(countries.begin(), countries.end(), country) == countries.end())
      countries.push_back(country);
    if (std::find(indicator_ids.begin(), indicator_ids.end(), indicator) ==
        indicator_ids.end())
      indicator_ids.push_back(indicator);
    year_set.insert(year);
    if (!cells.emplace(std::make_tuple(country, indicator, year), value).second)
      throw MalformedFile("duplicate cell at line " + std::to_string(line_no));
  }

  std::vector<int> years(year_set.begin(), year_set.end());
  std::vector<double> values(countries.size() * indicator_ids.size() * years.size());
  for (std::size_t c = 0; c < countries.size(); ++c)
    for (std::size_t i = 0; i < indicator_ids.size(); ++i)
      for (std::size_t y = 0; y < years.size(); ++y) {
        auto it = cells.find({countries[c], indicator_ids[i], years[y]});
        if (it == cells.end())
          throw MalformedFile("missing cell country=" + countries[c] +
                              " indicator=" + indicator_ids[i] +
                              " year=" + std::to_string(years[y]) +
                              " (no imputation is performed)");
        values[(c * indicator_ids.size() + i) * years.size() + y] = it->second;
      }

  std::vector<IndicatorInfo> indicators;
  const auto pillars = meta.value("pillars", nlohmann::json::object());
  const auto adjusted = meta.value("direction_adjusted", nlohmann::json::object());
  for (const auto& id : indicator_ids) {
    IndicatorInfo info;
    info.id = id;
    info.pillar = pillars.contains(id) ? pillars.at(id).get<int>() : 1;
    info.direction_adjusted =
        adjusted.contains(id) ? adjusted.at(id).get<bool>() : true;
    indicators.push_back(info);
  }

  std::map<std::string, std::string> roles;
  if (meta.contains("roles"))
    roles = meta.at("roles").get<std::map<std::string, std::string>>();

  std::map<std::string, CountryMeta> country_meta;
  if (meta.contains("countries")) {
    for (const auto& [code, m] : meta.at("countries").items())
      country_meta[code] = {m.value("income_per_capita", 0.0),
                            m.value("budget_fraction", 0.0)};
  }

  return IndicatorPanel(
      std::move(countries), std::move(indicators), std::move(years),
      std::move(values), std::move(roles), std::move(country_meta),
      meta.value("early_members", std::vector<std::string>{}),
      meta.value("reference", std::string{}));
}

void save_panel(const IndicatorPanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << panel.to_json().dump(2) << "\n";
}

IndicatorPanel load_panel_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile("bad panel json: " + std::string(e.what()));
  }
  return IndicatorPanel::from_json(doc);
}

std::vector<std::string> CountryGroups::members(int group) const {
  std::vector<std::string> out;
  for (const auto& [country, g] : assignment)
    if (g == group) out.push_back(country);
  return out;
}

CountryGroups classify_groups(const IndicatorPanel& panel,
                              const std::string& reference,
                              const std::set<std::string>& early_members) {
  const double reference_ipc = panel.meta(reference).income_per_capita;
  for (const auto& early : early_members) panel.country_index(early);
  CountryGroups groups;
  for (const auto& country : panel.countries()) {
    int g;
    if (country == reference)
      g = 3;
    else if (early_members.count(country))
      g = 1;
    else if (panel.meta(country).income_per_capita > reference_ipc)
      g = 2;
    else
      g = 4;
    groups.assignment[country] = g;
  }
  return groups;
}

PillarMeans pillar_means(const IndicatorPanel& panel, const CountryGroups& groups,
                         int year_from, int year_to) {
  const auto& years = panel.years();
  std::vector<int> year_idx;
  for (int y = 0; y < panel.n_years(); ++y)
    if (years[y] >= year_from && years[y] <= year_to) year_idx.push_back(y);
  if (year_idx.empty())
    throw MalformedFile("year range selects no panel years");

  PillarMeans result;
  result.pillars = panel.pillar_ids();
  result.groups = {1, 2, 3, 4};
  result.means = Eigen::MatrixXd::Zero(result.pillars.size(), 4);

  for (std::size_t p = 0; p < result.pillars.size(); ++p) {
    for (int g = 1; g <= 4; ++g) {
      double sum = 0.0;
      long count = 0;
      for (const auto& country : panel.countries()) {
        auto it = groups.assignment.find(country);
        if (it == groups.assignment.end() || it->second != g) continue;
        const int c = panel.country_index(country);
        for (int i = 0; i < panel.n_indicators(); ++i) {
          if (panel.indicators()[i].pillar != result.pillars[p]) continue;
          for (int y : year_idx) {
            sum += panel.value(c, i, y);
            ++count;
          }
        }
      }
      if (count == 0)
        throw EmptyGroup("group " + std::to_string(g) +
                         " has no observations for pillar " +
                         std::to_string(result.pillars[p]));
      result.means(p, g - 1) = sum / count;
    }
  }
  return result;
}

IndicatorPanel generate_synthetic_panel(int n_countries, int n_indicators,
                                        int n_years, std::uint64_t seed) {
  if (n_countries < 2 || n_years < 2)
    throw DimensionTooSmall("need at least 2 countries and 2 years");
  if (n_indicators < 5)
    throw DimensionTooSmall("need at least 5 indicators to host role indicators");

  Rng rng(seed);
  std::vector<std::string> countries;
  for (int c = 0; c < n_countries; ++c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "C%02d", c);
    countries.emplace_back(buf);
  }

  std::vector<IndicatorInfo> indicators;
  const int n_pillars = std::min(13, std::max(1, n_indicators / 3));
  for (int i = 0; i < n_indicators; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "ind%02d", i);
    // chunked pillar assignment so pillars group neighbouring indicators
    indicators.push_back({buf, 1 + (i * n_pillars) / n_indicators, true});
  }

  std::vector<int> years;
  for (int y = 0; y < n_years; ++y) years.push_back(2006 + y);

  // Bounded random walks with a country-wide common shock each year; the
  // common component keeps cross-indicator correlations mostly positive,
  // which is what real development panels look like.
  std::vector<double> values(
      static_cast<std::size_t>(n_countries) * n_indicators * n_years);
  auto at = [&](int c, int i, int y) -> double& {
    return values[(static_cast<std::size_t>(c) * n_indicators + i) * n_years + y];
  };
  for (int c = 0; c < n_countries; ++c) {
    std::vector<double> level(n_indicators);
    for (int i = 0; i < n_indicators; ++i) {
      // governance roles sit on the first indicators; start them higher
      level[i] = i < 3 ? rng.uniform(0.55, 0.9) : rng.uniform(0.15, 0.7);
      at(c, i, 0) = level[i];
    }
    for (int y = 1; y < n_years; ++y) {
      const double common = rng.uniform(-0.01, 0.04);
      for (int i = 0; i < n_indicators; ++i) {
        const double shock = common + rng.uniform(-0.025, 0.035);
        level[i] = std::clamp(level[i] + shock, 0.01, 0.99);
        at(c, i, y) = level[i];
      }
    }
  }

  std::map<std::string, std::string> roles = {
      {kRuleOfLawRole, indicators[0].id},
      {kControlOfCorruptionRole, indicators[1].id},
      {kDiversionOfFundsRole, indicators[2].id}};

  std::map<std::string, CountryMeta> meta;
  std::vector<std::pair<double, std::string>> by_ipc;
  for (const auto& country : countries) {
    CountryMeta m;
    m.income_per_capita = std::exp(rng.uniform(7.0, 11.5));  // ~1k..100k USD
    m.budget_fraction = rng.uniform(0.35, 0.9);
    meta[country] = m;
    by_ipc.emplace_back(-m.income_per_capita, country);
  }
  std::sort(by_ipc.begin(), by_ipc.end());
  std::vector<std::string> early;
  for (int k = 0; k < (n_countries + 3) / 4; ++k) early.push_back(by_ipc[k].second);
  const std::string reference = by_ipc[n_countries / 2].second;

  return IndicatorPanel(std::move(countries), std::move(indicators),
                        std::move(years), std::move(values), std::move(roles),
                        std::move(meta), std::move(early), reference);
}

}  // namespace ppi
