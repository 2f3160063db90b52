#include "gkf/graph.hpp"

#include <cmath>
#include <queue>
#include <string>

#include "gkf/errors.hpp"

namespace gkf {
namespace {

void validate_adjacency(const Matrix& a, bool require_zero_diagonal) {
  require_square(a, "adjacency");
  if (!a.allFinite()) {
    throw DataError("adjacency contains non-finite entries");
  }
  if (a.size() > 0 && a.minCoeff() < 0.0) {
    throw DataError("adjacency contains negative entries");
  }
  if (require_zero_diagonal) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (a(i, i) != 0.0) {
        throw DataError("adjacency has a self-loop at node " + std::to_string(i));
      }
    }
  }
}

}  // namespace

Matrix sym_normalize(const Matrix& adjacency) {
  validate_adjacency(adjacency, true);
  const Index n = adjacency.rows();
  const Matrix with_loops = adjacency + Matrix::Identity(n, n);
  const Vector inv_sqrt_deg = with_loops.rowwise().sum().cwiseSqrt().cwiseInverse();
  return inv_sqrt_deg.asDiagonal() * with_loops * inv_sqrt_deg.asDiagonal();
}

Matrix row_normalize(const Matrix& adjacency) {
  validate_adjacency(adjacency, false);
  Matrix out = adjacency;
  for (Index i = 0; i < out.rows(); ++i) {
    const double sum = out.row(i).sum();
    if (sum > 0.0) out.row(i) /= sum;
  }
  return out;
}

GraphTopology::GraphTopology(Matrix adjacency)
    : adjacency_(std::move(adjacency)),
      normalized_sym_(sym_normalize(adjacency_)),
      normalized_row_(row_normalize(adjacency_)) {}

GraphTopology GraphTopology::undirected(Index n_nodes,
                                        const std::vector<std::pair<Index, Index>>& edges) {
  std::vector<Edge> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    directed.push_back({u, v, 1.0});
    directed.push_back({v, u, 1.0});
  }
  return from_edges(n_nodes, directed);
}

GraphTopology GraphTopology::from_edges(Index n_nodes, const std::vector<Edge>& edges) {
  if (n_nodes < 1) throw DataError("graph needs at least one node");
  Matrix a = Matrix::Zero(n_nodes, n_nodes);
  for (const Edge& e : edges) {
    if (e.from < 0 || e.to < 0 || e.from >= n_nodes || e.to >= n_nodes) {
      throw DataError("edge (" + std::to_string(e.from) + ", " + std::to_string(e.to) +
                      ") references a node outside [0, " + std::to_string(n_nodes) + ")");
    }
    a(e.from, e.to) = e.weight;
  }
  return GraphTopology(std::move(a));
}

std::vector<Edge> GraphTopology::edges() const {
  std::vector<Edge> out;
  for (Index i = 0; i < adjacency_.rows(); ++i) {
    for (Index j = 0; j < adjacency_.cols(); ++j) {
      if (adjacency_(i, j) != 0.0) out.push_back({i, j, adjacency_(i, j)});
    }
  }
  return out;
}

bool GraphTopology::is_symmetric() const { return adjacency_ == adjacency_.transpose(); }

bool GraphTopology::is_connected() const {
  const Index n = n_nodes();
  if (n == 0) return true;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<Index> frontier;
  frontier.push(0);
  seen[0] = true;
  Index reached = 1;
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v = 0; v < n; ++v) {
      const bool linked = adjacency_(u, v) != 0.0 || adjacency_(v, u) != 0.0;
      if (linked && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

GraphTopology GraphTopology::permuted(const std::vector<Index>& perm) const {
  const Index n = n_nodes();
  if (static_cast<Index>(perm.size()) != n) {
    throw DimensionError("permutation length does not match node count");
  }
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      a(i, j) = adjacency_(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
  }
  return GraphTopology(std::move(a));
}

}  // namespace gkf
