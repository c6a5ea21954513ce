#include "treeot/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "treeot/error.hpp"

namespace treeot {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::string edge_text(Vertex u, Vertex v) {
  return "{" + std::to_string(u) + "," + std::to_string(v) + "}";
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kNonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kDisconnected: return "Disconnected";
    case ErrorCode::kVertexOutOfRange: return "VertexOutOfRange";
    case ErrorCode::kNotSpanning: return "NotSpanning";
    case ErrorCode::kHasCycle: return "HasCycle";
    case ErrorCode::kEdgeNotInGraph: return "EdgeNotInGraph";
    case ErrorCode::kMassMismatch: return "MassMismatch";
    case ErrorCode::kInvalidMeasure: return "InvalidMeasure";
    case ErrorCode::kConditionViolated: return "ConditionViolated";
    case ErrorCode::kNotImprovable: return "NotImprovable";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kBadDimensions: return "BadDimensions";
    case ErrorCode::kNegativePixel: return "NegativePixel";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

WeightedGraph WeightedGraph::build(std::size_t vertex_count, std::vector<Edge> edges) {
  if (vertex_count == 0) {
    throw Error(ErrorCode::kVertexOutOfRange, "graph needs at least one vertex");
  }
  WeightedGraph g;
  g.adjacency_.resize(vertex_count);
  for (Edge& e : edges) {
    if (e.u >= vertex_count || e.v >= vertex_count) {
      throw Error(ErrorCode::kVertexOutOfRange, "edge " + edge_text(e.u, e.v));
    }
    if (e.u == e.v) throw Error(ErrorCode::kSelfLoop, "edge " + edge_text(e.u, e.v));
    if (!(e.w > 0.0) || !std::isfinite(e.w)) {
      throw Error(ErrorCode::kNonPositiveWeight, "edge " + edge_text(e.u, e.v));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
    g.adjacency_[e.u].push_back({e.v, e.w});
    g.adjacency_[e.v].push_back({e.u, e.w});
  }
  for (auto& row : g.adjacency_) {
    std::sort(row.begin(), row.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.to < b.to; });
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (row[i].to == row[i - 1].to) {
        throw Error(ErrorCode::kDuplicateEdge,
                    "edge " + edge_text(static_cast<Vertex>(&row - g.adjacency_.data()),
                                        row[i].to));
      }
    }
  }

  DisjointSets sets(vertex_count);
  std::size_t components = vertex_count;
  for (const Edge& e : edges) {
    if (sets.unite(e.u, e.v)) --components;
  }
  if (components != 1) {
    throw Error(ErrorCode::kDisconnected,
                std::to_string(components) + " connected components");
  }
  g.edges_ = std::move(edges);
  return g;
}

std::optional<double> WeightedGraph::weight(Vertex u, Vertex v) const {
  if (u >= adjacency_.size() || v >= adjacency_.size()) return std::nullopt;
  const auto& row = adjacency_[u];
  auto it = std::lower_bound(row.begin(), row.end(), v,
                             [](const Neighbor& n, Vertex x) { return n.to < x; });
  if (it == row.end() || it->to != v) return std::nullopt;
  return it->w;
}

DistanceMatrix all_pairs_shortest_paths(const WeightedGraph& g) {
  const std::size_t n = g.vertex_count();
  DistanceMatrix d(n, std::numeric_limits<double>::infinity());
  for (Vertex x = 0; x < n; ++x) d(x, x) = 0.0;
  for (const Edge& e : g.edges()) {
    d(e.u, e.v) = std::min(d(e.u, e.v), e.w);
    d(e.v, e.u) = d(e.u, e.v);
  }
  // Floyd-Warshall.
  for (Vertex k = 0; k < n; ++k) {
    for (Vertex i = 0; i < n; ++i) {
      const double dik = d(i, k);
      if (dik == std::numeric_limits<double>::infinity()) continue;
      for (Vertex j = 0; j < n; ++j) {
        const double via = dik + d(k, j);
        if (via < d(i, j)) d(i, j) = via;
      }
    }
  }
  return d;
}

std::vector<Edge> geodesic_edges(const WeightedGraph& g, const DistanceMatrix& d) {
  std::vector<Edge> out;
  for (const Edge& e : g.edges()) {
    if (e.w <= d(e.u, e.v) + kMetricTol) out.push_back(e);
  }
  return out;
}

RootedTree RootedTree::from_parents(Vertex root, std::vector<Vertex> parent,
                                    std::vector<double> parent_weight) {
  const std::size_t n = parent.size();
  if (root >= n || parent_weight.size() != n) {
    throw Error(ErrorCode::kVertexOutOfRange, "root or weight vector out of range");
  }
  if (parent[root] != kNoVertex) {
    throw Error(ErrorCode::kHasCycle, "root has a parent");
  }
  RootedTree t;
  t.root_ = root;
  t.children_.resize(n);
  for (Vertex v = 0; v < n; ++v) {
    if (v == root) continue;
    if (parent[v] == kNoVertex) {
      throw Error(ErrorCode::kNotSpanning, "vertex " + std::to_string(v) + " has no parent");
    }
    if (parent[v] >= n) throw Error(ErrorCode::kVertexOutOfRange, "parent out of range");
    t.children_[parent[v]].push_back(v);
  }
  // Breadth-first from the root; anything unreached sits on a cycle.
  t.depth_.assign(n, 0);
  std::vector<Vertex> bfs;
  bfs.reserve(n);
  bfs.push_back(root);
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    for (Vertex c : t.children_[bfs[i]]) {
      t.depth_[c] = t.depth_[bfs[i]] + 1;
      bfs.push_back(c);
    }
  }
  if (bfs.size() != n) {
    throw Error(ErrorCode::kHasCycle, "parent links do not reach the root");
  }
  t.order_.assign(bfs.rbegin(), bfs.rend());
  t.parent_ = std::move(parent);
  t.parent_weight_ = std::move(parent_weight);
  t.parent_weight_[root] = 0.0;
  return t;
}

std::vector<Edge> RootedTree::edges() const {
  std::vector<Edge> out;
  out.reserve(parent_.empty() ? 0 : parent_.size() - 1);
  for (Vertex v = 0; v < parent_.size(); ++v) {
    if (v != root_) out.push_back({v, parent_[v], parent_weight_[v]});
  }
  return out;
}

RootedTree root_tree(std::size_t n, std::span<const Edge> tree_edges, Vertex root) {
  if (root >= n) throw Error(ErrorCode::kVertexOutOfRange, "root out of range");
  if (tree_edges.size() > n - 1) {
    throw Error(ErrorCode::kHasCycle, std::to_string(tree_edges.size()) + " edges on " +
                                          std::to_string(n) + " vertices");
  }
  DisjointSets sets(n);
  std::vector<std::vector<Neighbor>> adj(n);
  for (const Edge& e : tree_edges) {
    if (e.u >= n || e.v >= n) {
      throw Error(ErrorCode::kVertexOutOfRange, "edge " + edge_text(e.u, e.v));
    }
    if (!sets.unite(e.u, e.v)) {
      throw Error(ErrorCode::kHasCycle, "edge " + edge_text(e.u, e.v) + " closes a cycle");
    }
    adj[e.u].push_back({e.v, e.w});
    adj[e.v].push_back({e.u, e.w});
  }
  if (tree_edges.size() != n - 1) {
    throw Error(ErrorCode::kNotSpanning, std::to_string(tree_edges.size()) +
                                             " edges, expected " + std::to_string(n - 1));
  }
  std::vector<Vertex> parent(n, kNoVertex);
  std::vector<double> weight(n, 0.0);
  std::vector<bool> seen(n, false);
  std::vector<Vertex> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    const Vertex x = stack.back();
    stack.pop_back();
    for (const Neighbor& nb : adj[x]) {
      if (seen[nb.to]) continue;
      seen[nb.to] = true;
      parent[nb.to] = x;
      weight[nb.to] = nb.w;
      stack.push_back(nb.to);
    }
  }
  return RootedTree::from_parents(root, std::move(parent), std::move(weight));
}

RootedTree root_tree(const WeightedGraph& g,
                     std::span<const std::pair<Vertex, Vertex>> tree_edges, Vertex root) {
  std::vector<Edge> weighted;
  weighted.reserve(tree_edges.size());
  for (const auto& [u, v] : tree_edges) {
    const auto w = g.weight(u, v);
    if (!w) throw Error(ErrorCode::kEdgeNotInGraph, "edge " + edge_text(u, v));
    weighted.push_back({u, v, *w});
  }
  return root_tree(g.vertex_count(), weighted, root);
}

RootedTree reroot(const RootedTree& t, Vertex new_root) {
  if (new_root >= t.vertex_count()) {
    throw Error(ErrorCode::kVertexOutOfRange, "new root out of range");
  }
  std::vector<Vertex> parent(t.parents().begin(), t.parents().end());
  std::vector<double> weight(t.vertex_count());
  for (Vertex v = 0; v < t.vertex_count(); ++v) weight[v] = t.parent_weight(v);
  // Reverse the links on the path new_root -> old root.
  Vertex prev = kNoVertex;
  double prev_w = 0.0;
  Vertex cur = new_root;
  while (cur != kNoVertex) {
    const Vertex next = t.parent(cur);
    const double next_w = t.parent_weight(cur);
    parent[cur] = prev;
    weight[cur] = prev_w;
    prev = cur;
    prev_w = next_w;
    cur = next;
  }
  return RootedTree::from_parents(new_root, std::move(parent), std::move(weight));
}

std::vector<double> subtree_aggregate(const RootedTree& t, std::span<const double> v) {
  std::vector<double> acc(v.begin(), v.end());
  for (Vertex x : t.order()) {
    if (x != t.root()) acc[t.parent(x)] += acc[x];
  }
  return acc;
}

std::vector<PathStep> tree_path(const RootedTree& t, Vertex x, Vertex y) {
  std::vector<PathStep> up;
  std::vector<PathStep> down;
  while (t.depth(x) > t.depth(y)) {
    up.push_back({x, t.parent(x), StepDirection::kUp});
    x = t.parent(x);
  }
  while (t.depth(y) > t.depth(x)) {
    down.push_back({t.parent(y), y, StepDirection::kDown});
    y = t.parent(y);
  }
  while (x != y) {
    up.push_back({x, t.parent(x), StepDirection::kUp});
    down.push_back({t.parent(y), y, StepDirection::kDown});
    x = t.parent(x);
    y = t.parent(y);
  }
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

double tree_distance(const RootedTree& t, Vertex x, Vertex y) {
  double up = 0.0;
  double down = 0.0;
  while (t.depth(x) > t.depth(y)) {
    up += t.parent_weight(x);
    x = t.parent(x);
  }
  while (t.depth(y) > t.depth(x)) {
    down += t.parent_weight(y);
    y = t.parent(y);
  }
  while (x != y) {
    up += t.parent_weight(x);
    down += t.parent_weight(y);
    x = t.parent(x);
    y = t.parent(y);
  }
  return up + down;
}

DistanceMatrix tree_distance_matrix(const RootedTree& t) {
  const std::size_t n = t.vertex_count();
  DistanceMatrix d(n);
  std::vector<std::vector<Neighbor>> adj(n);
  for (const Edge& e : t.edges()) {
    adj[e.u].push_back({e.v, e.w});
    adj[e.v].push_back({e.u, e.w});
  }
  std::vector<Vertex> stack;
  std::vector<Vertex> from(n);
  for (Vertex s = 0; s < n; ++s) {
    stack.assign(1, s);
    from[s] = s;
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : adj[x]) {
        if (nb.to == from[x]) continue;
        from[nb.to] = x;
        d(s, nb.to) = d(s, x) + nb.w;
        stack.push_back(nb.to);
      }
    }
  }
  return d;
}

RootedTree random_spanning_tree(const WeightedGraph& g, Rng& rng) {
  const std::size_t n = g.vertex_count();
  const auto root = static_cast<Vertex>(rng.below(n));
  std::vector<bool> in_tree(n, false);
  std::vector<Vertex> next(n, kNoVertex);
  in_tree[root] = true;
  for (Vertex start = 0; start < n; ++start) {
    Vertex u = start;
    while (!in_tree[u]) {
      const auto nbs = g.neighbors(u);
      next[u] = nbs[rng.below(nbs.size())].to;
      u = next[u];
    }
    // Retrace the walk; the last exit from each vertex erases its loops.
    u = start;
    while (!in_tree[u]) {
      in_tree[u] = true;
      u = next[u];
    }
  }
  std::vector<double> weight(n, 0.0);
  for (Vertex v = 0; v < n; ++v) {
    if (v != root) weight[v] = *g.weight(v, next[v]);
  }
  next[root] = kNoVertex;
  return RootedTree::from_parents(root, std::move(next), std::move(weight));
}

}  // namespace treeot
