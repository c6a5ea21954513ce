#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "treeot/graph.hpp"
#include "treeot/rng.hpp"

namespace treeot {

struct AnnealConfig {
  double beta0 = 0.1;
  double target_accept = 0.01;
  double eta = 0.01;
  std::size_t window = 100;
  std::uint64_t max_iters = 100000;
  std::uint64_t seed = 0;
  std::uint64_t record_every = 1000;
  // Stop once best_cost <= target_cost + target_tol.
  std::optional<double> target_cost;
  double target_tol = 1e-10;

  // Throws Error{kInvalidConfig}.
  void validate() const;
};

// Largest inverse temperature the controller will reach.
inline constexpr double kMaxBeta = 1e300;

// Root-relocation move: attach the current root r to its graph neighbor
// new_root, drop the tree edge above new_root, and make new_root the root.
struct Candidate {
  Vertex new_root = kNoVertex;
  Vertex old_root = kNoVertex;
  double added_weight = 0.0;   // w(old_root, new_root)
  std::vector<Vertex> cycle;   // tree path new_root, parent(new_root), ..., old_root

  // The dropped edge is the added one: only the root moves.
  bool is_identity() const { return cycle.size() == 2; }
};

struct AnnealState {
  Vertex root = 0;
  std::vector<Vertex> parent;
  std::vector<double> parent_weight;
  std::vector<double> xi_cum;
  double current_cost = 0.0;

  Vertex best_root = 0;
  std::vector<Vertex> best_parent;
  std::vector<double> best_parent_weight;
  double best_cost = 0.0;

  double beta = 0.0;
  std::vector<std::uint8_t> window;  // ring buffer of accept bits
  std::size_t window_pos = 0;
  std::size_t window_filled = 0;
  std::size_t window_accepts = 0;
  std::uint64_t iter = 0;

  RootedTree tree() const;
  RootedTree best_tree() const;
  double acceptance_rate() const;
};

AnnealState make_state(const RootedTree& initial, std::span<const double> mu,
                       std::span<const double> nu, double beta0, std::size_t window);

// Draws the new root uniformly among graph neighbors of the current root and
// fills cand. Returns false when the root has no neighbors.
bool propose_move(const AnnealState& state, const WeightedGraph& g, Rng& rng,
                  Candidate& cand);

// K(current tree) - K(candidate tree), evaluated on the cycle only.
double hamiltonian_delta(const AnnealState& state, const Candidate& cand);

struct StepOutcome {
  bool accepted = false;
  double delta = 0.0;
};

// Accepts iff delta >= 0 or u <= exp(beta * delta); on acceptance swaps the
// edge, moves the root and updates the cumulative imbalance on the cycle.
// The accept bit is pushed into the window either way.
StepOutcome accept_step(AnnealState& state, const Candidate& cand, double u);

// beta <- beta * (1 + eta * (a - a*)), with a the window acceptance rate.
// No-op until the window is full.
void update_temperature(AnnealState& state, const AnnealConfig& cfg);

struct TraceRecord {
  std::uint64_t iter = 0;
  double current_cost = 0.0;
  double best_cost = 0.0;
  double beta = 0.0;
  double accept_rate = 0.0;
};

struct AnnealResult {
  RootedTree best_tree;
  double best_cost = 0.0;
  std::vector<TraceRecord> trace;
  std::uint64_t iterations = 0;
  bool reached_target = false;
  // Largest |incremental cost - recomputed cost| seen at the periodic resync.
  double max_drift = 0.0;
};

// Runs from a uniform random spanning tree drawn with cfg.seed.
AnnealResult anneal(const WeightedGraph& g, std::span<const double> mu,
                    std::span<const double> nu, const AnnealConfig& cfg);

AnnealResult anneal_from(const WeightedGraph& g, std::span<const double> mu,
                         std::span<const double> nu, const AnnealConfig& cfg,
                         const RootedTree& initial, Rng& rng);

// Independent chains on separate threads. Chain i is seeded from the i-th
// split of Rng(cfg.seed); a single chain uses cfg.seed itself. Returns the
// chain with the lowest best_cost (lowest index on ties).
AnnealResult anneal_chains(const WeightedGraph& g, std::span<const double> mu,
                           std::span<const double> nu, const AnnealConfig& cfg,
                           std::size_t chains);

}  // namespace treeot
