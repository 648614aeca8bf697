#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gnnctrl/matrix.hpp"
#include "gnnctrl/rng.hpp"

namespace gnnctrl {

// Undirected simple graph. Edges are stored once with i < j, sorted
// lexicographically. Positions (one row per node, 2 columns) are kept for
// geometric graphs and may be empty for hand-built graphs.
struct Graph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  Matrix positions;

  bool has_positions() const noexcept { return positions.rows() == n && n > 0; }
};

// Validates edge invariants (no self-loops, i < j, sorted, in range).
void validate_graph(const Graph& g);

// n points uniform on the unit square; each node is linked to its k nearest
// neighbors (euclidean distance, index tie-break) and the union is
// symmetrized. Requires 0 < k < n.
Graph generate_geometric_graph(std::size_t n, std::size_t k, RngStream& rng);

bool is_connected(const Graph& g);

// Neighbor lists per node, both directions of every edge.
std::vector<std::vector<std::size_t>> adjacency_lists(const Graph& g);

// Binary adjacency matrix normalized by its largest eigenvalue, so the
// result has unit spectral norm. The graph must be connected, which makes
// the largest eigenvalue positive and simple.
Matrix build_support(const Graph& g);

}  // namespace gnnctrl
