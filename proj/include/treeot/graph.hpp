#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "treeot/rng.hpp"

namespace treeot {

using Vertex = std::uint32_t;
inline constexpr Vertex kNoVertex = std::numeric_limits<Vertex>::max();

// Absolute tolerance for metric identities (triangle equalities, geodesics).
inline constexpr double kMetricTol = 1e-12;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  Vertex to = 0;
  double w = 0.0;
};

// Undirected connected graph with strictly positive weights, no self-loops
// and no parallel edges. Immutable once built.
class WeightedGraph {
 public:
  // Throws Error{kSelfLoop, kNonPositiveWeight, kDuplicateEdge,
  // kVertexOutOfRange, kDisconnected}.
  static WeightedGraph build(std::size_t vertex_count, std::vector<Edge> edges);

  std::size_t vertex_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Neighbor> neighbors(Vertex v) const { return adjacency_[v]; }

  std::optional<double> weight(Vertex u, Vertex v) const;
  bool has_edge(Vertex u, Vertex v) const { return weight(u, v).has_value(); }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    return a.edges_ == b.edges_ && a.adjacency_.size() == b.adjacency_.size();
  }

 private:
  WeightedGraph() = default;

  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;  // sorted by neighbor id
};

// Dense N x N matrix of pairwise distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n, double fill = 0.0)
      : n_(n), d_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double operator()(Vertex x, Vertex y) const { return d_[x * n_ + y]; }
  double& operator()(Vertex x, Vertex y) { return d_[x * n_ + y]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

DistanceMatrix all_pairs_shortest_paths(const WeightedGraph& g);

// Edges lying on at least one shortest path, i.e. edges {x,y} with
// d(x,y) == w(x,y) up to kMetricTol (equivalent to the existence of s,t with
// d(s,x) + w + d(y,t) == d(s,t)).
std::vector<Edge> geodesic_edges(const WeightedGraph& g, const DistanceMatrix& d);

// A spanning tree with a distinguished root, oriented towards the root.
class RootedTree {
 public:
  RootedTree() = default;

  // parent[root] must be kNoVertex. Throws Error{kNotSpanning, kHasCycle}
  // when the parent links do not form a tree rooted at `root`.
  static RootedTree from_parents(Vertex root, std::vector<Vertex> parent,
                                 std::vector<double> parent_weight);

  std::size_t vertex_count() const { return parent_.size(); }
  Vertex root() const { return root_; }
  Vertex parent(Vertex v) const { return parent_[v]; }
  double parent_weight(Vertex v) const { return parent_weight_[v]; }
  std::span<const Vertex> children(Vertex v) const { return children_[v]; }
  std::size_t depth(Vertex v) const { return depth_[v]; }
  // Every vertex appears after all of its descendants.
  std::span<const Vertex> order() const { return order_; }
  std::span<const Vertex> parents() const { return parent_; }

  // Undirected edges (child, parent) with weights, ordered by child id.
  std::vector<Edge> edges() const;

  friend bool operator==(const RootedTree& a, const RootedTree& b) {
    return a.root_ == b.root_ && a.parent_ == b.parent_ &&
           a.parent_weight_ == b.parent_weight_;
  }

 private:
  Vertex root_ = 0;
  std::vector<Vertex> parent_;
  std::vector<double> parent_weight_;
  std::vector<std::vector<Vertex>> children_;
  std::vector<std::size_t> depth_;
  std::vector<Vertex> order_;
};

// Throws Error{kEdgeNotInGraph, kHasCycle, kNotSpanning, kVertexOutOfRange}.
RootedTree root_tree(const WeightedGraph& g,
                     std::span<const std::pair<Vertex, Vertex>> tree_edges,
                     Vertex root);

// Same as root_tree, using an explicit weighted edge list (no host graph).
RootedTree root_tree(std::size_t vertex_count, std::span<const Edge> tree_edges,
                     Vertex root);

RootedTree reroot(const RootedTree& t, Vertex new_root);

// result(x) = sum of v over the subtree rooted at x, in one leaves-to-root pass.
std::vector<double> subtree_aggregate(const RootedTree& t, std::span<const double> v);

enum class StepDirection { kUp, kDown };

struct PathStep {
  Vertex from = 0;
  Vertex to = 0;
  StepDirection direction = StepDirection::kUp;
};

// Unique tree path from x to y: "up" steps (towards the root) until the
// lowest common ancestor, then "down" steps.
std::vector<PathStep> tree_path(const RootedTree& t, Vertex x, Vertex y);

double tree_distance(const RootedTree& t, Vertex x, Vertex y);

// All-pairs d_T in O(N^2).
DistanceMatrix tree_distance_matrix(const RootedTree& t);

// Wilson's loop-erased random walk (unweighted steps, so uniform over spanning
// trees); the root is drawn uniformly.
RootedTree random_spanning_tree(const WeightedGraph& g, Rng& rng);

}  // namespace treeot
