#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "treeot/graph.hpp"
#include "treeot/transport.hpp"

namespace treeot {

struct ExactSolution {
  double value = 0.0;
  TransportPlan plan;  // a basic solution: its bipartite support is a forest
  Potential dual;      // 1-Lipschitz for d, anchored at vertex 0
};

inline constexpr std::size_t kDefaultOracleCap = 1000;

// Exact W1 for the ground cost d by successive shortest augmenting paths on
// the bipartite transportation network. Throws Error{kTooLarge} when the
// number of vertices exceeds cap.
ExactSolution exact_k_distance(const DistanceMatrix& d, std::span<const double> mu,
                               std::span<const double> nu,
                               std::size_t cap = kDefaultOracleCap);

struct CheckResult {
  bool passed = true;
  double worst_violation = 0.0;
};

// Marginals within tol and all entries nonnegative.
CheckResult check_admissible(const TransportPlan& p, std::span<const double> mu,
                             std::span<const double> nu, double tol = 1e-9);

// |u(x) - u(y)| <= w(x,y) + 1e-9 on every edge.
CheckResult check_lipschitz(const Potential& u, const WeightedGraph& g);
CheckResult check_lipschitz(const Potential& u, std::span<const Edge> edges);

// gamma(x,y) > 0 implies u(x) - u(y) == d(x,y) within 1e-9.
CheckResult check_complementary(const TransportPlan& p, const Potential& u,
                                const DistanceMatrix& d);

// gamma(x,y) > 0 implies d_G(x,y) == d_T(x,y) within 1e-9.
CheckResult check_geodesic_support(const TransportPlan& p, const DistanceMatrix& d_graph,
                                   const RootedTree& t);

// max over x of |(u1(x) - u2(x)) - (u1(0) - u2(0))| <= tol.
CheckResult potential_match_up_to_constant(const Potential& u1, const Potential& u2,
                                           double tol = 1e-6);

// No family of at most max_m support pairs can be re-matched more cheaply
// (within 1e-9).
CheckResult check_cyclical_monotonicity(const TransportPlan& p, const DistanceMatrix& d,
                                        std::size_t max_m = 4);

struct VertexSupport {
  bool is_forest = true;
  std::size_t proper_edges = 0;
  bool is_spanning_tree_up_to_loops = false;
};

// Support with orientation forgotten and loops removed. A pair used in both
// directions counts as a cycle.
VertexSupport check_vertex_support(const TransportPlan& p);

struct NondegeneracyVerdict {
  bool passed = false;
  bool exhaustive = true;  // false: only a necessary condition was checked
};

inline constexpr std::size_t kExhaustiveNondegeneracyLimit = 22;

// Exhaustive subset-sum test for N <= 22: every non-empty proper subset has
// mu(S) != nu(S) (margin 1e-12). Above that, checks that the cumulative
// imbalance is nonzero on random labelled trees over the vertex set, which
// is necessary but not sufficient.
NondegeneracyVerdict check_weak_nondegeneracy(std::span<const double> mu,
                                              std::span<const double> nu,
                                              std::uint64_t seed = 0,
                                              std::size_t sampled_trees = 64);

}  // namespace treeot
