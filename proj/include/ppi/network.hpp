#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ppi/panel.hpp"

namespace ppi {

/// Weighted directed spillover network over N policy issues. An entry
/// adjacency(i, j) != 0 is a directed edge i -> j with that signed weight;
/// each filtered pair carries exactly one direction and there are no
/// self-loops. degrees[i] counts incident edges regardless of direction.
struct SpilloverNetwork {
  Eigen::MatrixXd adjacency;
  std::vector<int> degrees;

  int size() const { return static_cast<int>(adjacency.rows()); }

  /// Builds the degree vector and checks the structural invariants.
  static SpilloverNetwork from_adjacency(Eigen::MatrixXd adjacency);

  nlohmann::json to_json(const std::vector<std::string>& node_names = {}) const;
  static SpilloverNetwork from_json(const nlohmann::json& doc);
};

/// Period-to-period changes: row t holds levels(t+1) - levels(t).
Eigen::MatrixXd first_differences(const Eigen::MatrixXd& series);

/// Pearson correlation between columns; zero-variance columns correlate 0
/// with everything while the diagonal stays 1.
Eigen::MatrixXd similarity_matrix(const Eigen::MatrixXd& diffs);

enum class EdgeScore { kAbsolute, kSigned };

/// Triangulated maximally filtered graph of a symmetric weight matrix:
/// greedy seed on the best 4-clique, then repeated best vertex-into-face
/// insertion. Returns the 3(N-2) undirected kept pairs (i < j).
std::vector<std::pair<int, int>> tmfg_filter(const Eigen::MatrixXd& weights,
                                             EdgeScore score = EdgeScore::kAbsolute);

enum class EdgeDirection { kXToY, kYToX };

struct OrientedEdge {
  EdgeDirection direction = EdgeDirection::kXToY;
  double weight = 0.0;       // signed Pearson correlation of the pair
  double statistic = 0.0;    // pairwise likelihood-ratio approximation
};

/// Decides the causal direction of a pair from the tanh-based pairwise
/// likelihood-ratio statistic; ties fall back to x -> y.
OrientedEdge orient_edge(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Full two-step estimation for one country: difference, correlate, filter
/// with TMFG on absolute correlations, then orient every kept pair. Extra
/// pool countries contribute their difference rows to the correlations.
SpilloverNetwork estimate_network(const IndicatorPanel& panel,
                                  const std::string& country,
                                  const std::vector<std::string>& pool = {});

void save_network(const SpilloverNetwork& network, const std::string& path,
                  const std::vector<std::string>& node_names = {});
SpilloverNetwork load_network(const std::string& path);

}  // namespace ppi
