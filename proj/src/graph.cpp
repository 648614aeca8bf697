#include "gnnctrl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "gnnctrl/errors.hpp"

namespace gnnctrl {

void validate_graph(const Graph& g) {
  for (auto [i, j] : g.edges) {
    if (i >= j) throw InvalidArgumentError("edges must be stored with i < j");
    if (j >= g.n) throw InvalidArgumentError("edge endpoint out of range");
  }
  if (!std::is_sorted(g.edges.begin(), g.edges.end()))
    throw InvalidArgumentError("edge list must be sorted");
  if (std::adjacent_find(g.edges.begin(), g.edges.end()) != g.edges.end())
    throw InvalidArgumentError("duplicate edge");
}

Graph generate_geometric_graph(std::size_t n, std::size_t k, RngStream& rng) {
  if (n == 0 || k == 0 || k >= n)
    throw InvalidArgumentError("geometric graph requires 0 < k < n");
  Graph g;
  g.n = n;
  g.positions = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    g.positions(i, 0) = rng.uniform();
    g.positions(i, 1) = rng.uniform();
  }

  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dx = g.positions(i, 0) - g.positions(j, 0);
      double dy = g.positions(i, 1) - g.positions(j, 1);
      dist[j] = {dx * dx + dy * dy, j};
    }
    dist[i].first = std::numeric_limits<double>::infinity();
    // Pair ordering breaks distance ties by node index, deterministically.
    std::sort(dist.begin(), dist.end());
    for (std::size_t m = 0; m < k; ++m) {
      std::size_t j = dist[m].second;
      edge_set.insert({std::min(i, j), std::max(i, j)});
    }
  }
  g.edges.assign(edge_set.begin(), edge_set.end());
  return g;
}

std::vector<std::vector<std::size_t>> adjacency_lists(const Graph& g) {
  std::vector<std::vector<std::size_t>> adj(g.n);
  for (auto [i, j] : g.edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  return adj;
}

bool is_connected(const Graph& g) {
  if (g.n == 0) return false;
  auto adj = adjacency_lists(g);
  std::vector<char> seen(g.n, 0);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!frontier.empty()) {
    std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == g.n;
}

Matrix build_support(const Graph& g) {
  validate_graph(g);
  if (!is_connected(g))
    throw DisconnectedGraphError("support requires a connected graph");
  Matrix s(g.n, g.n);
  for (auto [i, j] : g.edges) {
    s(i, j) = 1.0;
    s(j, i) = 1.0;
  }
  Spectrum spec = sym_eig(s);
  double top = spec.values.back();
  // Connected adjacency: the top eigenvalue is positive and dominates in
  // magnitude, so dividing by it leaves unit spectral norm.
  Matrix out = s;
  out *= 1.0 / top;
  return out;
}

}  // namespace gnnctrl
