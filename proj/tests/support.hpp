#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "treeot/graph.hpp"
#include "treeot/rng.hpp"
#include "treeot/transport.hpp"

namespace treeot::testing {

// Line x1 - ... - x6 with unit weights and the measures whose difference is
// (0.05, 0.05, -0.2, -0.1, -0.1, 0.3).
inline const std::vector<double> kLineMu{0.15, 0.15, 0.1, 0.1, 0.1, 0.4};
inline const std::vector<double> kLineNu{0.1, 0.1, 0.3, 0.2, 0.2, 0.1};

// Expected cumulative imbalance on the line for each root x1..x6.
inline const std::vector<std::vector<double>> kLineXiRows{
    {0.0, -0.05, -0.1, 0.1, 0.2, 0.3},   {0.05, 0.0, -0.1, 0.1, 0.2, 0.3},
    {0.05, 0.1, 0.0, 0.1, 0.2, 0.3},     {0.05, 0.1, -0.1, 0.0, 0.2, 0.3},
    {0.05, 0.1, -0.1, -0.2, 0.0, 0.3},   {0.05, 0.1, -0.1, -0.2, -0.3, 0.0},
};

inline WeightedGraph path_graph(std::size_t n, double w = 1.0) {
  std::vector<Edge> edges;
  for (Vertex v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, w});
  return WeightedGraph::build(n, edges);
}

inline RootedTree line_rooted_at(std::size_t n, Vertex root) {
  std::vector<Edge> edges;
  for (Vertex v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, 1.0});
  return root_tree(n, edges, root);
}

// Random labelled tree: vertex perm[i] attaches to a uniformly chosen
// earlier vertex, with weights uniform in (0, 1].
inline RootedTree random_tree(std::size_t n, Rng& rng) {
  std::vector<Vertex> perm(n);
  for (Vertex v = 0; v < n; ++v) perm[v] = v;
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    edges.push_back({perm[i], perm[rng.below(i)], 1.0 - rng.uniform()});
  }
  return root_tree(n, edges, static_cast<Vertex>(rng.below(n)));
}

inline WeightedGraph tree_as_graph(const RootedTree& t) {
  return WeightedGraph::build(t.vertex_count(), t.edges());
}

// Random probability vector; with sparse = true about a third of the entries
// are zero (at least one stays positive).
inline std::vector<double> random_measure(std::size_t n, Rng& rng, bool sparse = false) {
  std::vector<double> m(n);
  for (double& v : m) v = rng.uniform();
  if (sparse) {
    for (double& v : m) {
      if (rng.below(3) == 0) v = 0.0;
    }
    m[rng.below(n)] += 0.5;
  }
  return normalize_measure(m);
}

// Connected random graph: a random tree plus extra random edges.
inline WeightedGraph random_graph(std::size_t n, std::size_t extra, Rng& rng) {
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  for (Vertex v = 1; v < n; ++v) {
    const auto u = static_cast<Vertex>(rng.below(v));
    edges.push_back({u, v, 1.0 - rng.uniform()});
    used[u][v] = used[v][u] = true;
  }
  for (std::size_t k = 0; k < extra; ++k) {
    const auto a = static_cast<Vertex>(rng.below(n));
    const auto b = static_cast<Vertex>(rng.below(n));
    if (a == b || used[a][b]) continue;
    used[a][b] = used[b][a] = true;
    edges.push_back({a, b, 1.0 - rng.uniform()});
  }
  return WeightedGraph::build(n, edges);
}

// Single-source Dijkstra with a binary heap, as an independent check on the
// all-pairs routine.
inline std::vector<double> dijkstra(const WeightedGraph& g, Vertex s) {
  std::vector<double> dist(g.vertex_count(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[s] = 0.0;
  heap.push({0.0, s});
  while (!heap.empty()) {
    auto [dv, v] = heap.top();
    heap.pop();
    if (dv > dist[v]) continue;
    for (const Neighbor& nb : g.neighbors(v)) {
      if (dv + nb.w < dist[nb.to]) {
        dist[nb.to] = dv + nb.w;
        heap.push({dist[nb.to], nb.to});
      }
    }
  }
  return dist;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Every support pair moves along tree edges whose cumulative imbalance has
// the sign of the step: positive going up, negative going down.
inline bool path_signs_hold(const TransportPlan& p, const RootedTree& t,
                     const std::vector<double>& xi_cum) {
  for (const auto& [k, m] : p.entries()) {
    for (const PathStep& st : tree_path(t, k.first, k.second)) {
      if (st.direction == StepDirection::kUp && !(xi_cum[st.from] > 0.0)) return false;
      if (st.direction == StepDirection::kDown && !(xi_cum[st.to] < 0.0)) return false;
    }
  }
  return true;
}

inline bool has_antiparallel_pair(const TransportPlan& p) {
  for (const auto& [k, m] : p.entries()) {
    if (k.first != k.second && p.get(k.second, k.first) > 0.0) return true;
  }
  return false;
}

}  // namespace treeot::testing
