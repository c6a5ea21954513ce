#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "treeot/graph.hpp"

namespace treeot {

// Probability vector indexed by vertex.
using Measure = std::vector<double>;

// Checks nonnegativity and finiteness, then rescales to total mass 1.
// Throws Error{kInvalidMeasure} on negative/non-finite entries or zero mass.
Measure normalize_measure(std::vector<double> mass);

// Throws Error{kInvalidMeasure} unless every entry is a finite nonnegative
// number and the total is 1 within 1e-9.
void validate_measure(std::span<const double> mu);

// Sign used for sgn(0) in the potential formula.
enum class SignAtZero { kPlus = 1, kMinus = -1 };

struct Potential {
  std::vector<double> u;
  Vertex anchor = 0;
};

// Mass on the directed tree edges (x, parent(x)) and (parent(x), x). Entries
// at the root are always zero.
struct Flow {
  std::vector<double> up;
  std::vector<double> down;
};

// Sparse nonnegative matrix over vertex pairs; zero entries are not stored.
class TransportPlan {
 public:
  using Key = std::pair<Vertex, Vertex>;

  explicit TransportPlan(std::size_t n = 0) : n_(n) {}

  std::size_t dimension() const { return n_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Adds mass to (x,y); a non-positive result removes the entry.
  void add(Vertex x, Vertex y, double mass);
  void set(Vertex x, Vertex y, double mass);
  double get(Vertex x, Vertex y) const;

  const std::map<Key, double>& entries() const { return entries_; }
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

  friend bool operator==(const TransportPlan&, const TransportPlan&) = default;

 private:
  std::size_t n_;
  std::map<Key, double> entries_;
};

// xi = mu - nu. Throws Error{kMassMismatch} if |sum xi| > 1e-9 or the sizes
// differ.
std::vector<double> imbalance(std::span<const double> mu, std::span<const double> nu);

// Xi(x) = sum of xi over the subtree of x.
std::vector<double> cumulative_imbalance(const RootedTree& t, std::span<const double> xi);

// sum over non-root x of w(x, parent(x)) * |Xi(x)|.
double tree_k_distance(const RootedTree& t, std::span<const double> mu,
                       std::span<const double> nu);
double tree_k_distance(const RootedTree& t, std::span<const double> cumulative);

// u(y) = sum over the non-root ancestors-or-self x of y of w(x, x+) sgn(Xi(x)),
// u(root) = 0. Values of Xi with magnitude <= kZeroMass count as zero.
Potential tree_potential(const RootedTree& t, std::span<const double> mu,
                         std::span<const double> nu,
                         SignAtZero sign_at_zero = SignAtZero::kPlus);

// up = max(Xi, 0), down = max(-Xi, 0) on every non-root vertex.
Flow beckmann_flow(const RootedTree& t, std::span<const double> mu,
                   std::span<const double> nu);

// div(f)(x) = outgoing minus incoming mass at x.
std::vector<double> flow_divergence(const RootedTree& t, const Flow& f);

// True iff Xi(x) * Xi(y) < 0 for every non-root x and every child y of x.
bool check_alternating_condition(const RootedTree& t, std::span<const double> mu,
                                 std::span<const double> nu);

// Explicit plan moving Xi+ up and Xi- down each edge and keeping the rest in
// place. Throws Error{kConditionViolated} unless the alternating condition holds.
TransportPlan closed_form_plan(const RootedTree& t, std::span<const double> mu,
                               std::span<const double> nu);

// Optimal plan for the tree metric built leaf by leaf: the diagonal keeps
// min(mu, nu), and every transfer follows the sign of Xi along its path.
TransportPlan dp_transport_plan(const RootedTree& t, std::span<const double> mu,
                                std::span<const double> nu);

double plan_cost(const TransportPlan& p, const DistanceMatrix& d);

// Mass of each plan entry routed along its tree path.
Flow plan_to_flow(const TransportPlan& p, const RootedTree& t);

// Rewrites an optimal plan for a tree metric so that every diagonal entry is
// min(mu, nu), keeping marginals and cost. Throws Error{kNotImprovable} when a
// rewrite step finds no usable pair, which means the plan was not optimal.
TransportPlan canonicalize_diagonal(const TransportPlan& p, std::span<const double> mu,
                                    std::span<const double> nu, const DistanceMatrix& d);

// W1 on the real line: sum of gap * |F_mu - F_nu| over consecutive points.
// points must be strictly increasing.
double line_w1(std::span<const double> points, std::span<const double> mu,
               std::span<const double> nu);

// The line graph on sorted points, rooted at the last point.
RootedTree line_tree(std::span<const double> points);

// Magnitude below which residual masses inside the plan construction and the
// sign of Xi are treated as zero.
inline constexpr double kZeroMass = 1e-14;

}  // namespace treeot
