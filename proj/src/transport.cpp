#include "treeot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "treeot/error.hpp"

namespace treeot {

namespace {

double snap(double v) { return std::abs(v) <= kZeroMass ? 0.0 : v; }

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

Measure normalize_measure(std::vector<double> mass) {
  double total = 0.0;
  for (double m : mass) {
    if (!std::isfinite(m) || m < 0.0) {
      throw Error(ErrorCode::kInvalidMeasure, "masses must be finite and nonnegative");
    }
    total += m;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidMeasure, "total mass is zero");
  for (double& m : mass) m /= total;
  return mass;
}

void validate_measure(std::span<const double> mu) {
  double total = 0.0;
  for (double m : mu) {
    if (!std::isfinite(m) || m < 0.0) {
      throw Error(ErrorCode::kInvalidMeasure, "masses must be finite and nonnegative");
    }
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidMeasure, "total mass " + std::to_string(total));
  }
}

void TransportPlan::add(Vertex x, Vertex y, double mass) {
  auto it = entries_.find({x, y});
  if (it == entries_.end()) {
    if (mass > 0.0) entries_.emplace(Key{x, y}, mass);
    return;
  }
  it->second += mass;
  if (!(it->second > 0.0)) entries_.erase(it);
}

void TransportPlan::set(Vertex x, Vertex y, double mass) {
  if (mass > 0.0) {
    entries_[{x, y}] = mass;
  } else {
    entries_.erase({x, y});
  }
}

double TransportPlan::get(Vertex x, Vertex y) const {
  auto it = entries_.find({x, y});
  return it == entries_.end() ? 0.0 : it->second;
}

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> s(n_, 0.0);
  for (const auto& [k, m] : entries_) s[k.first] += m;
  return s;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> s(n_, 0.0);
  for (const auto& [k, m] : entries_) s[k.second] += m;
  return s;
}

std::vector<double> imbalance(std::span<const double> mu, std::span<const double> nu) {
  if (mu.size() != nu.size()) {
    throw Error(ErrorCode::kMassMismatch, "measures have different sizes");
  }
  std::vector<double> xi(mu.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    xi[i] = mu[i] - nu[i];
    total += xi[i];
  }
  if (std::abs(total) > 1e-9) {
    throw Error(ErrorCode::kMassMismatch, "total masses differ by " + std::to_string(total));
  }
  return xi;
}

std::vector<double> cumulative_imbalance(const RootedTree& t, std::span<const double> xi) {
  return subtree_aggregate(t, xi);
}

double tree_k_distance(const RootedTree& t, std::span<const double> cumulative) {
  double k = 0.0;
  for (Vertex x = 0; x < t.vertex_count(); ++x) {
    if (x != t.root()) k += t.parent_weight(x) * std::abs(cumulative[x]);
  }
  return k;
}

double tree_k_distance(const RootedTree& t, std::span<const double> mu,
                       std::span<const double> nu) {
  return tree_k_distance(t, cumulative_imbalance(t, imbalance(mu, nu)));
}

Potential tree_potential(const RootedTree& t, std::span<const double> mu,
                         std::span<const double> nu, SignAtZero sign_at_zero) {
  const auto xi_cum = cumulative_imbalance(t, imbalance(mu, nu));
  Potential p;
  p.anchor = t.root();
  p.u.assign(t.vertex_count(), 0.0);
  const auto order = t.order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Vertex x = *it;
    if (x == t.root()) continue;
    int s = sign_of(snap(xi_cum[x]));
    if (s == 0) s = static_cast<int>(sign_at_zero);
    p.u[x] = p.u[t.parent(x)] + s * t.parent_weight(x);
  }
  return p;
}

Flow beckmann_flow(const RootedTree& t, std::span<const double> mu,
                   std::span<const double> nu) {
  const auto xi_cum = cumulative_imbalance(t, imbalance(mu, nu));
  Flow f{std::vector<double>(t.vertex_count(), 0.0),
         std::vector<double>(t.vertex_count(), 0.0)};
  for (Vertex x = 0; x < t.vertex_count(); ++x) {
    if (x == t.root()) continue;
    f.up[x] = std::max(xi_cum[x], 0.0);
    f.down[x] = std::max(-xi_cum[x], 0.0);
  }
  return f;
}

std::vector<double> flow_divergence(const RootedTree& t, const Flow& f) {
  std::vector<double> div(t.vertex_count(), 0.0);
  for (Vertex x = 0; x < t.vertex_count(); ++x) {
    if (x == t.root()) continue;
    const double net = f.up[x] - f.down[x];
    div[x] += net;
    div[t.parent(x)] -= net;
  }
  return div;
}

bool check_alternating_condition(const RootedTree& t, std::span<const double> mu,
                                 std::span<const double> nu) {
  const auto xi_cum = cumulative_imbalance(t, imbalance(mu, nu));
  for (Vertex x = 0; x < t.vertex_count(); ++x) {
    if (x == t.root()) continue;
    for (Vertex y : t.children(x)) {
      if (!(xi_cum[x] * xi_cum[y] < 0.0)) return false;
    }
  }
  return true;
}

TransportPlan closed_form_plan(const RootedTree& t, std::span<const double> mu,
                               std::span<const double> nu) {
  if (!check_alternating_condition(t, mu, nu)) {
    throw Error(ErrorCode::kConditionViolated,
                "cumulative imbalance does not alternate in sign along the tree");
  }
  const auto xi_cum = cumulative_imbalance(t, imbalance(mu, nu));
  const std::size_t n = t.vertex_count();
  TransportPlan plan(n);
  for (Vertex x = 0; x < n; ++x) {
    double stay = mu[x];
    if (x != t.root()) {
      const double up = std::max(xi_cum[x], 0.0);
      const double down = std::max(-xi_cum[x], 0.0);
      plan.set(x, t.parent(x), up);
      plan.set(t.parent(x), x, down);
      stay -= up;
    }
    for (Vertex y : t.children(x)) stay -= std::max(-xi_cum[y], 0.0);
    plan.set(x, x, snap(stay));
  }
  return plan;
}

TransportPlan dp_transport_plan(const RootedTree& t, std::span<const double> mu,
                                std::span<const double> nu) {
  const std::size_t n = t.vertex_count();
  std::vector<double> xi = imbalance(mu, nu);
  TransportPlan plan(n);
  for (Vertex x = 0; x < n; ++x) plan.set(x, x, std::min(mu[x], nu[x]));
  for (double& v : xi) v = snap(v);
  std::vector<double> xi_cum = cumulative_imbalance(t, xi);
  for (double& v : xi_cum) v = snap(v);

  // The working tree shrinks as balanced leaves are pruned.
  std::vector<bool> alive(n, true);
  std::vector<std::size_t> live_children(n);
  for (Vertex v = 0; v < n; ++v) live_children[v] = t.children(v).size();

  auto prune_from = [&](Vertex v) {
    while (v != t.root() && alive[v] && live_children[v] == 0 && xi[v] == 0.0) {
      alive[v] = false;
      v = t.parent(v);
      --live_children[v];
    }
  };
  for (Vertex v : t.order()) prune_from(v);

  std::vector<Vertex> layer;
  std::vector<Vertex> next_layer;
  const std::size_t max_steps = 4 * n + 10;
  for (std::size_t step = 0;; ++step) {
    Vertex x = kNoVertex;
    for (Vertex v = 0; v < n; ++v) {
      if (v != t.root() && alive[v] && live_children[v] == 0) {
        x = v;
        break;
      }
    }
    if (x == kNoVertex) break;
    if (step >= max_steps) {
      throw std::logic_error("dp_transport_plan did not terminate");
    }
    const int s = sign_of(xi[x]);

    // Climb while the rest of T_u cannot absorb the leaf's excess.
    double m = std::abs(xi[x]);
    Vertex below = x;
    Vertex u = t.parent(x);
    for (;;) {
      const double rest = snap(s * (xi_cum[u] - xi_cum[below]));
      bool climb = rest > 0.0;
      if (rest == 0.0 && s * xi[u] >= 0.0) {
        climb = true;
        for (Vertex c : t.children(u)) {
          if (c != below && s * xi_cum[c] < 0.0) climb = false;
        }
      }
      if (!climb) break;
      m = std::min(m, std::abs(xi_cum[u]));
      below = u;
      u = t.parent(u);
    }

    // Nearest opposite-sign vertex below u, by hops then id, descending only
    // through subtrees whose cumulative imbalance has the opposite sign.
    Vertex y = kNoVertex;
    layer.assign(1, u);
    while (y == kNoVertex && !layer.empty()) {
      next_layer.clear();
      for (Vertex v : layer) {
        if (s * xi[v] < 0.0 && v < y) y = v;
        for (Vertex c : t.children(v)) {
          if (alive[c] && s * xi_cum[c] < 0.0) next_layer.push_back(c);
        }
      }
      layer.swap(next_layer);
    }
    if (y == kNoVertex) throw std::logic_error("dp_transport_plan found no receiver");

    m = std::min(m, std::abs(xi[y]));
    for (Vertex v = y; v != u; v = t.parent(v)) m = std::min(m, std::abs(xi_cum[v]));

    if (s > 0) {
      plan.add(x, y, m);
    } else {
      plan.add(y, x, m);
    }
    xi[x] = snap(xi[x] - s * m);
    xi[y] = snap(xi[y] + s * m);
    for (Vertex v = x; v != u; v = t.parent(v)) xi_cum[v] = snap(xi_cum[v] - s * m);
    for (Vertex v = y; v != u; v = t.parent(v)) xi_cum[v] = snap(xi_cum[v] + s * m);

    prune_from(x);
    prune_from(y);
  }
  return plan;
}

double plan_cost(const TransportPlan& p, const DistanceMatrix& d) {
  double cost = 0.0;
  for (const auto& [k, m] : p.entries()) {
    if (k.first != k.second) cost += m * d(k.first, k.second);
  }
  return cost;
}

Flow plan_to_flow(const TransportPlan& p, const RootedTree& t) {
  Flow f{std::vector<double>(t.vertex_count(), 0.0),
         std::vector<double>(t.vertex_count(), 0.0)};
  for (const auto& [k, m] : p.entries()) {
    for (const PathStep& st : tree_path(t, k.first, k.second)) {
      if (st.direction == StepDirection::kUp) {
        f.up[st.from] += m;
      } else {
        f.down[st.to] += m;
      }
    }
  }
  return f;
}

TransportPlan canonicalize_diagonal(const TransportPlan& p, std::span<const double> mu,
                                    std::span<const double> nu, const DistanceMatrix& d) {
  constexpr double kDone = 1e-13;
  const std::size_t n = p.dimension();
  TransportPlan out = p;
  for (Vertex x = 0; x < n; ++x) {
    const double target = std::min(mu[x], nu[x]);
    for (;;) {
      const double gap = target - out.get(x, x);
      if (gap <= kDone) break;
      std::vector<std::pair<Vertex, double>> outgoing;
      std::vector<std::pair<Vertex, double>> incoming;
      for (const auto& [k, m] : out.entries()) {
        if (k.first == x && k.second != x) outgoing.push_back({k.second, m});
        if (k.second == x && k.first != x) incoming.push_back({k.first, m});
      }
      bool found = false;
      for (const auto& [y2, in_mass] : incoming) {
        for (const auto& [y1, out_mass] : outgoing) {
          if (std::abs(d(y2, x) + d(x, y1) - d(y2, y1)) > 1e-9) continue;
          const double m = std::min({in_mass, out_mass, gap});
          out.add(x, y1, -m);
          out.add(y2, x, -m);
          out.add(x, x, m);
          out.add(y2, y1, m);
          found = true;
          break;
        }
        if (found) break;
      }
      if (!found) {
        throw Error(ErrorCode::kNotImprovable,
                    "no rewrite pair at vertex " + std::to_string(x));
      }
    }
  }
  return out;
}

RootedTree line_tree(std::span<const double> points) {
  const std::size_t n = points.size();
  if (n == 0) throw Error(ErrorCode::kInvalidMeasure, "no points");
  std::vector<Vertex> parent(n, kNoVertex);
  std::vector<double> weight(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(points[i + 1] > points[i])) {
      throw Error(ErrorCode::kInvalidMeasure, "points must be strictly increasing");
    }
    parent[i] = static_cast<Vertex>(i + 1);
    weight[i] = points[i + 1] - points[i];
  }
  return RootedTree::from_parents(static_cast<Vertex>(n - 1), std::move(parent),
                                  std::move(weight));
}

double line_w1(std::span<const double> points, std::span<const double> mu,
               std::span<const double> nu) {
  if (points.size() != mu.size() || mu.size() != nu.size()) {
    throw Error(ErrorCode::kMassMismatch, "points and measures differ in size");
  }
  double f_mu = 0.0;
  double f_nu = 0.0;
  double k = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] > points[i])) {
      throw Error(ErrorCode::kInvalidMeasure, "points must be strictly increasing");
    }
    f_mu += mu[i];
    f_nu += nu[i];
    k += (points[i + 1] - points[i]) * std::abs(f_mu - f_nu);
  }
  return k;
}

}  // namespace treeot
