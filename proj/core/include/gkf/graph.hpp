#pragma once

#include <utility>
#include <vector>

#include "gkf/linalg.hpp"

namespace gkf {

// D^{-1/2} (I + A) D^{-1/2}, with D the degree matrix of I + A.
Matrix sym_normalize(const Matrix& adjacency);

// Divides each row with positive sum by that sum; zero rows stay zero.
Matrix row_normalize(const Matrix& adjacency);

struct Edge {
  Index from = 0;
  Index to = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Node set plus adjacency, with both normalizations cached at construction.
class GraphTopology {
 public:
  GraphTopology() = default;
  explicit GraphTopology(Matrix adjacency);

  // Undirected helper: every edge is inserted in both directions.
  static GraphTopology undirected(Index n_nodes, const std::vector<std::pair<Index, Index>>& edges);
  static GraphTopology from_edges(Index n_nodes, const std::vector<Edge>& edges);

  Index n_nodes() const { return adjacency_.rows(); }
  const Matrix& adjacency() const { return adjacency_; }
  const Matrix& normalized_sym() const { return normalized_sym_; }
  const Matrix& normalized_row() const { return normalized_row_; }

  // Nonzero entries of the adjacency, row-major order.
  std::vector<Edge> edges() const;
  bool is_symmetric() const;
  bool is_connected() const;

  // Relabels nodes so that new node k is old node perm[k].
  GraphTopology permuted(const std::vector<Index>& perm) const;

 private:
  Matrix adjacency_;
  Matrix normalized_sym_;
  Matrix normalized_row_;
};

}  // namespace gkf
