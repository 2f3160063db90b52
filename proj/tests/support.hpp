#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "gkf/graph.hpp"
#include "gkf/linalg.hpp"
#include "gkf/rng.hpp"

namespace gkf::testing {

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-scale, scale);
  }
  return m;
}

inline Vector random_vector(Rng& rng, Index n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale);
}

inline Matrix random_spd(Rng& rng, Index n, double ridge = 0.5) {
  const Matrix a = random_matrix(rng, n, n);
  return a * a.transpose() + ridge * Matrix::Identity(n, n);
}

// Symmetric 0/1 adjacency with edge probability p; may be disconnected.
inline GraphTopology random_graph(Rng& rng, Index n, double p) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  return GraphTopology::undirected(n, edges);
}

inline GraphTopology path_graph(Index n) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return GraphTopology::undirected(n, edges);
}

// Random permutation where new position k holds old node perm[k].
inline std::vector<Index> random_permutation(Rng& rng, Index n) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.below(i))]);
  }
  return perm;
}

// Rows of a node-major flattened vector with `features` entries per node.
inline Vector permute_nodes(const Vector& v, const std::vector<Index>& perm, Index features = 1) {
  Vector out(v.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    out.segment(static_cast<Index>(k) * features, features) = v.segment(perm[k] * features, features);
  }
  return out;
}

}  // namespace gkf::testing
