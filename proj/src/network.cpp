#include "ppi/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

namespace ppi {

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::VectorXd ca = a.array() - ma;
  const Eigen::VectorXd cb = b.array() - mb;
  const double na = ca.norm();
  const double nb = cb.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(ca.dot(cb) / (na * nb), -1.0, 1.0);
}

}  // namespace

SpilloverNetwork SpilloverNetwork::from_adjacency(Eigen::MatrixXd adjacency) {
  if (adjacency.rows() != adjacency.cols())
    throw DegenerateInput("adjacency must be square");
  const int n = static_cast<int>(adjacency.rows());
  for (int i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) throw DegenerateInput("self-loop in adjacency");
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(adjacency(i, j)))
        throw NonFiniteInput("non-finite adjacency entry");
      if (i < j && adjacency(i, j) != 0.0 && adjacency(j, i) != 0.0)
        throw DegenerateInput("pair carries two directions");
    }
  }
  SpilloverNetwork net;
  net.adjacency = std::move(adjacency);
  net.degrees.assign(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (net.adjacency(i, j) != 0.0) {
        ++net.degrees[i];
        ++net.degrees[j];
      }
  return net;
}

nlohmann::json SpilloverNetwork::to_json(
    const std::vector<std::string>& node_names) const {
  nlohmann::json doc;
  doc["n"] = size();
  if (!node_names.empty()) doc["nodes"] = node_names;
  nlohmann::json edges = nlohmann::json::array();
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j)
      if (adjacency(i, j) != 0.0)
        edges.push_back(
            {{"source", i}, {"target", j}, {"weight", adjacency(i, j)}});
  doc["edges"] = edges;
  return doc;
}

SpilloverNetwork SpilloverNetwork::from_json(const nlohmann::json& doc) {
  try {
    const int n = doc.at("n").get<int>();
    Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
    for (const auto& edge : doc.at("edges"))
      adjacency(edge.at("source").get<int>(), edge.at("target").get<int>()) =
          edge.at("weight").get<double>();
    return from_adjacency(std::move(adjacency));
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad network json: ") + e.what());
  }
}

Eigen::MatrixXd first_differences(const Eigen::MatrixXd& series) {
  if (series.rows() < 3)
    throw TooFewYears("need at least 3 years to difference");
  return series.bottomRows(series.rows() - 1) - series.topRows(series.rows() - 1);
}

Eigen::MatrixXd similarity_matrix(const Eigen::MatrixXd& diffs) {
  if (diffs.rows() < 2)
    throw DegenerateInput("need at least 2 observations per column");
  const int n = static_cast<int>(diffs.cols());
  Eigen::MatrixXd sim = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = pearson(diffs.col(i), diffs.col(j));
      sim(i, j) = r;
      sim(j, i) = r;
    }
  return sim;
}

std::vector<std::pair<int, int>> tmfg_filter(const Eigen::MatrixXd& weights,
                                             EdgeScore score) {
  if (weights.rows() != weights.cols())
    throw DegenerateInput("weight matrix must be square");
  const int n = static_cast<int>(weights.rows());
  if (n < 3) throw TooFewNodes("TMFG needs at least 3 nodes");
  if (!weights.allFinite()) throw NonFiniteInput("non-finite weight");

  auto value = [&](int i, int j) {
    const double w = weights(i, j);
    return score == EdgeScore::kAbsolute ? std::abs(w) : w;
  };

  std::vector<std::pair<int, int>> edges;
  if (n == 3) {
    edges = {{0, 1}, {0, 2}, {1, 2}};
    return edges;
  }

  // seed: the 4-clique with the largest total score
  std::array<int, 4> best{0, 1, 2, 3};
  double best_score = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        for (int d = c + 1; d < n; ++d) {
          const double s = value(a, b) + value(a, c) + value(a, d) +
                           value(b, c) + value(b, d) + value(c, d);
          if (s > best_score) {
            best_score = s;
            best = {a, b, c, d};
          }
        }

  std::vector<bool> placed(n, false);
  for (int v : best) placed[v] = true;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      edges.emplace_back(std::min(best[i], best[j]), std::max(best[i], best[j]));

  std::vector<std::array<int, 3>> faces = {{best[0], best[1], best[2]},
                                           {best[0], best[1], best[3]},
                                           {best[0], best[2], best[3]},
                                           {best[1], best[2], best[3]}};

  auto gain = [&](int v, const std::array<int, 3>& face) {
    return value(v, face[0]) + value(v, face[1]) + value(v, face[2]);
  };

  int remaining = n - 4;
  while (remaining > 0) {
    int best_vertex = -1;
    std::size_t best_face = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int v = 0; v < n; ++v) {
      if (placed[v]) continue;
      for (std::size_t f = 0; f < faces.size(); ++f) {
        const double g = gain(v, faces[f]);
        if (g > best_gain) {
          best_gain = g;
          best_vertex = v;
          best_face = f;
        }
      }
    }
    const auto face = faces[best_face];
    placed[best_vertex] = true;
    for (int u : face)
      edges.emplace_back(std::min(best_vertex, u), std::max(best_vertex, u));
    faces.erase(faces.begin() + static_cast<std::ptrdiff_t>(best_face));
    faces.push_back({face[0], face[1], best_vertex});
    faces.push_back({face[0], face[2], best_vertex});
    faces.push_back({face[1], face[2], best_vertex});
    --remaining;
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

OrientedEdge orient_edge(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw DegenerateInput("series length mismatch");
  const auto len = x.size();
  if (len < 3) throw DegenerateInput("need at least 3 observations");

  auto standardize = [len](const Eigen::VectorXd& v) {
    const double mean = v.mean();
    const Eigen::VectorXd centered = v.array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(len));
    if (sd == 0.0) throw ZeroVariance("constant series cannot be oriented");
    return Eigen::VectorXd(centered / sd);
  };

  const Eigen::VectorXd xs = standardize(x);
  const Eigen::VectorXd ys = standardize(y);
  const double rho = pearson(x, y);
  const double stat =
      rho * (xs.array() * ys.array().tanh() - xs.array().tanh() * ys.array())
                .mean();

  OrientedEdge out;
  out.weight = rho;
  out.statistic = stat;
  out.direction = stat < 0.0 ? EdgeDirection::kYToX : EdgeDirection::kXToY;
  return out;
}

SpilloverNetwork estimate_network(const IndicatorPanel& panel,
                                  const std::string& country,
                                  const std::vector<std::string>& pool) {
  Eigen::MatrixXd diffs = first_differences(panel.series(country));
  for (const auto& extra : pool) {
    const Eigen::MatrixXd more = first_differences(panel.series(extra));
    Eigen::MatrixXd stacked(diffs.rows() + more.rows(), diffs.cols());
    stacked << diffs, more;
    diffs = std::move(stacked);
  }

  const Eigen::MatrixXd sim = similarity_matrix(diffs);
  const auto pairs = tmfg_filter(sim, EdgeScore::kAbsolute);

  const int n = static_cast<int>(sim.rows());
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : pairs) {
    const OrientedEdge oriented = orient_edge(diffs.col(i), diffs.col(j));
    if (oriented.direction == EdgeDirection::kXToY)
      adjacency(i, j) = oriented.weight;
    else
      adjacency(j, i) = oriented.weight;
  }
  return SpilloverNetwork::from_adjacency(std::move(adjacency));
}

void save_network(const SpilloverNetwork& network, const std::string& path,
                  const std::vector<std::string>& node_names) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << network.to_json(node_names).dump(2) << "\n";
}

SpilloverNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("bad network json: ") + e.what());
  }
  return SpilloverNetwork::from_json(doc);
}

}  // namespace ppi
