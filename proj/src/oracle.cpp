#include "treeot/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "treeot/error.hpp"
#include "treeot/rng.hpp"

namespace treeot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPositive = 1e-15;

// Dense residual network: source s, supply nodes 0..n-1 (offset 1), demand
// nodes (offset 1+n), sink t. Flow on supply->demand arcs is kept in `flow`.
class Transportation {
 public:
  Transportation(const DistanceMatrix& d, std::span<const double> mu,
                 std::span<const double> nu)
      : n_(mu.size()),
        d_(d),
        supply_(mu.begin(), mu.end()),
        demand_(nu.begin(), nu.end()),
        flow_(n_ * n_, 0.0),
        pi_(node_count(), 0.0) {}

  void solve() {
    const std::size_t nodes = node_count();
    std::vector<double> dist(nodes);
    std::vector<std::size_t> prev(nodes);
    std::vector<bool> done(nodes);
    const std::size_t s = 0;
    const std::size_t t = nodes - 1;
    while (remaining(supply_) > kPositive && remaining(demand_) > kPositive) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(done.begin(), done.end(), false);
      dist[s] = 0.0;
      for (;;) {
        std::size_t v = nodes;
        for (std::size_t i = 0; i < nodes; ++i) {
          if (!done[i] && dist[i] < kInf && (v == nodes || dist[i] < dist[v])) v = i;
        }
        if (v == nodes) break;
        done[v] = true;
        for_each_arc(v, [&](std::size_t w, double cost) {
          // Reduced costs are nonnegative up to rounding.
          const double reduced = std::max(cost + pi_[v] - pi_[w], 0.0);
          if (dist[v] + reduced < dist[w]) {
            dist[w] = dist[v] + reduced;
            prev[w] = v;
          }
        });
      }
      if (dist[t] == kInf) break;
      for (std::size_t v = 0; v < nodes; ++v) pi_[v] += std::min(dist[v], dist[t]);

      double delta = kInf;
      for (std::size_t w = t; w != s; w = prev[w]) delta = std::min(delta, capacity(prev[w], w));
      for (std::size_t w = t; w != s; w = prev[w]) push(prev[w], w, delta);
    }
  }

  TransportPlan plan() const {
    TransportPlan p(n_);
    for (Vertex i = 0; i < n_; ++i) {
      for (Vertex j = 0; j < n_; ++j) p.set(i, j, flow_[i * n_ + j]);
    }
    return p;
  }

  // Node potential of demand vertex j.
  double demand_potential(std::size_t j) const { return pi_[1 + n_ + j]; }

 private:
  std::size_t node_count() const { return 2 * n_ + 2; }

  static double remaining(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
  }

  bool is_supply(std::size_t v) const { return v >= 1 && v <= n_; }
  bool is_demand(std::size_t v) const { return v > n_ && v <= 2 * n_; }

  template <typename F>
  void for_each_arc(std::size_t v, F&& visit) const {
    const std::size_t t = node_count() - 1;
    if (v == 0) {
      for (std::size_t i = 0; i < n_; ++i) {
        if (supply_[i] > kPositive) visit(1 + i, 0.0);
      }
    } else if (is_supply(v)) {
      const std::size_t i = v - 1;
      for (std::size_t j = 0; j < n_; ++j) visit(1 + n_ + j, d_(i, j));
    } else if (is_demand(v)) {
      const std::size_t j = v - 1 - n_;
      for (std::size_t i = 0; i < n_; ++i) {
        if (flow_[i * n_ + j] > kPositive) visit(1 + i, -d_(i, j));
      }
      if (demand_[j] > kPositive) visit(t, 0.0);
    }
  }

  double capacity(std::size_t a, std::size_t b) const {
    if (a == 0) return supply_[b - 1];
    if (is_supply(a)) return kInf;
    const std::size_t j = a - 1 - n_;
    if (is_supply(b)) return flow_[(b - 1) * n_ + j];
    return demand_[j];
  }

  void push(std::size_t a, std::size_t b, double delta) {
    if (a == 0) {
      supply_[b - 1] -= delta;
    } else if (is_supply(a)) {
      flow_[(a - 1) * n_ + (b - 1 - n_)] += delta;
    } else if (is_supply(b)) {
      double& f = flow_[(b - 1) * n_ + (a - 1 - n_)];
      f -= delta;
      if (f < kPositive) f = 0.0;
    } else {
      demand_[a - 1 - n_] -= delta;
    }
  }

  std::size_t n_;
  const DistanceMatrix& d_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::vector<double> flow_;
  std::vector<double> pi_;
};

// Cancels cycles in the bipartite support (supply x, demand y) until it is a
// forest, shifting mass in the direction that does not increase cost.
TransportPlan make_basic(TransportPlan plan, const DistanceMatrix& d) {
  const std::size_t n = plan.dimension();
  for (;;) {
    // Bipartite node ids: supply x -> x, demand y -> n + y.
    std::vector<std::vector<std::pair<std::size_t, TransportPlan::Key>>> adj(2 * n);
    for (const auto& [k, m] : plan.entries()) {
      adj[k.first].push_back({n + k.second, k});
      adj[n + k.second].push_back({k.first, k});
    }
    std::vector<int> state(2 * n, 0);
    std::vector<std::size_t> via_node(2 * n);
    std::vector<TransportPlan::Key> via_key(2 * n);
    std::vector<TransportPlan::Key> cycle;

    std::function<bool(std::size_t, std::size_t)> dfs = [&](std::size_t v,
                                                             std::size_t from) -> bool {
      state[v] = 1;
      for (const auto& [w, key] : adj[v]) {
        if (w == from) continue;
        if (state[w] == 1) {
          cycle.push_back(key);
          for (std::size_t x = v; x != w; x = via_node[x]) cycle.push_back(via_key[x]);
          return true;
        }
        if (state[w] == 0) {
          via_node[w] = v;
          via_key[w] = key;
          if (dfs(w, v)) return true;
        }
      }
      state[v] = 2;
      return false;
    };
    bool found = false;
    for (std::size_t v = 0; v < 2 * n && !found; ++v) {
      if (state[v] == 0) found = dfs(v, 2 * n);
    }
    if (!found) return plan;

    // Entries alternate +/- around the cycle.
    double cost_even = 0.0;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const double c = d(cycle[i].first, cycle[i].second);
      cost_even += (i % 2 == 0) ? c : -c;
    }
    const std::size_t shrink_parity = cost_even >= 0.0 ? 0 : 1;
    double theta = kInf;
    for (std::size_t i = shrink_parity; i < cycle.size(); i += 2) {
      theta = std::min(theta, plan.get(cycle[i].first, cycle[i].second));
    }
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const auto& k = cycle[i];
      if (i % 2 == shrink_parity) {
        const double left = plan.get(k.first, k.second) - theta;
        plan.set(k.first, k.second, left <= kPositive ? 0.0 : left);
      } else {
        plan.add(k.first, k.second, theta);
      }
    }
  }
}

}  // namespace

ExactSolution exact_k_distance(const DistanceMatrix& d, std::span<const double> mu,
                               std::span<const double> nu, std::size_t cap) {
  const std::size_t n = mu.size();
  if (n > cap) {
    throw Error(ErrorCode::kTooLarge,
                std::to_string(n) + " vertices exceeds cap " + std::to_string(cap));
  }
  if (nu.size() != n || d.size() != n) {
    throw Error(ErrorCode::kMassMismatch, "measure and distance sizes differ");
  }
  // Mass common to both measures stays put; only the excesses are routed,
  // so supply and demand vertices are disjoint.
  std::vector<double> excess(n);
  std::vector<double> deficit(n);
  for (std::size_t x = 0; x < n; ++x) {
    excess[x] = std::max(mu[x] - nu[x], 0.0);
    deficit[x] = std::max(nu[x] - mu[x], 0.0);
  }
  Transportation net(d, excess, deficit);
  net.solve();

  ExactSolution sol;
  sol.plan = make_basic(net.plan(), d);
  for (Vertex x = 0; x < n; ++x) sol.plan.set(x, x, std::min(mu[x], nu[x]));
  sol.value = plan_cost(sol.plan, d);

  // c-transform of the demand-side potentials gives a 1-Lipschitz dual.
  sol.dual.anchor = 0;
  sol.dual.u.assign(n, 0.0);
  for (Vertex x = 0; x < n; ++x) {
    double best = kInf;
    for (Vertex y = 0; y < n; ++y) best = std::min(best, d(x, y) - net.demand_potential(y));
    sol.dual.u[x] = best;
  }
  const double shift = sol.dual.u[0];
  for (double& v : sol.dual.u) v -= shift;
  return sol;
}

CheckResult check_admissible(const TransportPlan& p, std::span<const double> mu,
                             std::span<const double> nu, double tol) {
  CheckResult r;
  for (const auto& [k, m] : p.entries()) {
    if (!(m >= 0.0)) r.worst_violation = std::max(r.worst_violation, std::abs(m));
  }
  if (p.dimension() != mu.size() || p.dimension() != nu.size()) {
    return {false, kInf};
  }
  const auto rows = p.row_sums();
  const auto cols = p.col_sums();
  for (std::size_t x = 0; x < mu.size(); ++x) {
    r.worst_violation = std::max(r.worst_violation, std::abs(rows[x] - mu[x]));
    r.worst_violation = std::max(r.worst_violation, std::abs(cols[x] - nu[x]));
  }
  r.passed = r.worst_violation <= tol;
  return r;
}

CheckResult check_lipschitz(const Potential& u, std::span<const Edge> edges) {
  CheckResult r;
  for (const Edge& e : edges) {
    const double excess = std::abs(u.u[e.u] - u.u[e.v]) - e.w;
    r.worst_violation = std::max(r.worst_violation, excess);
  }
  r.passed = r.worst_violation <= 1e-9;
  return r;
}

CheckResult check_lipschitz(const Potential& u, const WeightedGraph& g) {
  return check_lipschitz(u, g.edges());
}

CheckResult check_complementary(const TransportPlan& p, const Potential& u,
                                const DistanceMatrix& d) {
  CheckResult r;
  for (const auto& [k, m] : p.entries()) {
    const double gap = std::abs(u.u[k.first] - u.u[k.second] - d(k.first, k.second));
    r.worst_violation = std::max(r.worst_violation, gap);
  }
  r.passed = r.worst_violation <= 1e-9;
  return r;
}

CheckResult check_geodesic_support(const TransportPlan& p, const DistanceMatrix& d_graph,
                                   const RootedTree& t) {
  CheckResult r;
  for (const auto& [k, m] : p.entries()) {
    const double gap =
        std::abs(d_graph(k.first, k.second) - tree_distance(t, k.first, k.second));
    r.worst_violation = std::max(r.worst_violation, gap);
  }
  r.passed = r.worst_violation <= 1e-9;
  return r;
}

CheckResult potential_match_up_to_constant(const Potential& u1, const Potential& u2,
                                           double tol) {
  if (u1.u.size() != u2.u.size()) return {false, kInf};
  CheckResult r;
  if (u1.u.empty()) return r;
  const double offset = u1.u[0] - u2.u[0];
  for (std::size_t x = 0; x < u1.u.size(); ++x) {
    r.worst_violation = std::max(r.worst_violation, std::abs(u1.u[x] - u2.u[x] - offset));
  }
  r.passed = r.worst_violation <= tol;
  return r;
}

CheckResult check_cyclical_monotonicity(const TransportPlan& p, const DistanceMatrix& d,
                                        std::size_t max_m) {
  std::vector<TransportPlan::Key> support;
  for (const auto& [k, m] : p.entries()) support.push_back(k);
  CheckResult r;
  std::vector<std::size_t> pick;
  std::vector<std::size_t> perm;

  std::function<void(std::size_t)> choose = [&](std::size_t start) {
    if (pick.size() >= 2) {
      double base = 0.0;
      for (std::size_t i : pick) base += d(support[i].first, support[i].second);
      perm.resize(pick.size());
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      while (std::next_permutation(perm.begin(), perm.end())) {
        double alt = 0.0;
        for (std::size_t i = 0; i < pick.size(); ++i) {
          alt += d(support[pick[i]].first, support[pick[perm[i]]].second);
        }
        r.worst_violation = std::max(r.worst_violation, base - alt);
      }
    }
    if (pick.size() == max_m) return;
    for (std::size_t i = start; i < support.size(); ++i) {
      pick.push_back(i);
      choose(i + 1);
      pick.pop_back();
    }
  };
  choose(0);
  r.passed = r.worst_violation <= 1e-9;
  return r;
}

VertexSupport check_vertex_support(const TransportPlan& p) {
  const std::size_t n = p.dimension();
  std::vector<std::pair<Vertex, Vertex>> pairs;
  for (const auto& [k, m] : p.entries()) {
    if (k.first != k.second) pairs.push_back(std::minmax(k.first, k.second));
  }
  std::sort(pairs.begin(), pairs.end());
  VertexSupport out;
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i] == pairs[i - 1]) out.is_forest = false;
  }
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  out.proper_edges = pairs.size();

  std::vector<std::size_t> root(n);
  std::iota(root.begin(), root.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return root[x] == x ? x : root[x] = find(root[x]);
  };
  for (const auto& [a, b] : pairs) {
    const std::size_t ra = find(a);
    const std::size_t rb = find(b);
    if (ra == rb) {
      out.is_forest = false;
    } else {
      root[ra] = rb;
    }
  }
  out.is_spanning_tree_up_to_loops = out.is_forest && n > 0 && out.proper_edges == n - 1;
  return out;
}

NondegeneracyVerdict check_weak_nondegeneracy(std::span<const double> mu,
                                              std::span<const double> nu,
                                              std::uint64_t seed,
                                              std::size_t sampled_trees) {
  constexpr double kMargin = 1e-12;
  const std::vector<double> xi = imbalance(mu, nu);
  const std::size_t n = xi.size();
  if (n < 2) return {true, true};

  if (n <= kExhaustiveNondegeneracyLimit) {
    // Meet in the middle: all subset sums of each half, then look for a pair
    // summing to ~0 other than (empty, empty) and (full, full).
    const std::size_t left_n = n / 2;
    const std::size_t right_n = n - left_n;
    auto sums = [&](std::size_t offset, std::size_t count) {
      std::vector<double> s(std::size_t{1} << count, 0.0);
      for (std::size_t mask = 1; mask < s.size(); ++mask) {
        const auto low = static_cast<std::size_t>(std::countr_zero(mask));
        s[mask] = s[mask & (mask - 1)] + xi[offset + low];
      }
      return s;
    };
    const std::vector<double> left = sums(0, left_n);
    const std::vector<double> right = sums(left_n, right_n);
    std::vector<std::size_t> order(right.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return right[a] < right[b]; });
    const std::size_t left_full = left.size() - 1;
    const std::size_t right_full = right.size() - 1;
    for (std::size_t lm = 0; lm < left.size(); ++lm) {
      const double want = -left[lm];
      auto it = std::lower_bound(order.begin(), order.end(), want - kMargin,
                                 [&](std::size_t i, double v) { return right[i] < v; });
      for (; it != order.end() && right[*it] <= want + kMargin; ++it) {
        const bool empty = lm == 0 && *it == 0;
        const bool full = lm == left_full && *it == right_full;
        if (!empty && !full) return {false, true};
      }
    }
    return {true, true};
  }

  Rng rng(seed);
  std::vector<Vertex> perm(n);
  for (std::size_t k = 0; k < sampled_trees; ++k) {
    std::iota(perm.begin(), perm.end(), Vertex{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<Vertex> parent(n, kNoVertex);
    for (std::size_t i = 1; i < n; ++i) parent[perm[i]] = perm[rng.below(i)];
    const RootedTree t =
        RootedTree::from_parents(perm[0], std::move(parent), std::vector<double>(n, 1.0));
    const auto xi_cum = cumulative_imbalance(t, xi);
    for (Vertex x = 0; x < n; ++x) {
      if (x != t.root() && std::abs(xi_cum[x]) <= kMargin) return {false, false};
    }
  }
  return {true, false};
}

}  // namespace treeot
