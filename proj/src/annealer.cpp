#include "treeot/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "treeot/error.hpp"
#include "treeot/transport.hpp"

namespace treeot {

namespace {

constexpr std::uint64_t kResyncEvery = 100000;

void push_bit(AnnealState& s, bool accepted) {
  const std::uint8_t bit = accepted ? 1 : 0;
  if (s.window_filled < s.window.size()) {
    ++s.window_filled;
  } else {
    s.window_accepts -= s.window[s.window_pos];
  }
  s.window[s.window_pos] = bit;
  s.window_accepts += bit;
  s.window_pos = (s.window_pos + 1) % s.window.size();
}

void record(const AnnealState& s, std::vector<TraceRecord>& trace) {
  trace.push_back({s.iter, s.current_cost, s.best_cost, s.beta, s.acceptance_rate()});
}

}  // namespace

void AnnealConfig::validate() const {
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) {
    throw Error(ErrorCode::kInvalidConfig, "beta0 must be positive");
  }
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "target acceptance must lie in (0,1)");
  }
  // a ranges over [0,1], so eta * |a - a*| peaks at one of the ends.
  if (!(eta > 0.0) || eta * std::max(target_accept, 1.0 - target_accept) >= 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "eta must be positive and keep beta positive");
  }
  if (window == 0) throw Error(ErrorCode::kInvalidConfig, "window must be positive");
  if (max_iters == 0) throw Error(ErrorCode::kInvalidConfig, "max_iters must be positive");
  if (record_every == 0) {
    throw Error(ErrorCode::kInvalidConfig, "record_every must be positive");
  }
}

RootedTree AnnealState::tree() const {
  return RootedTree::from_parents(root, parent, parent_weight);
}

RootedTree AnnealState::best_tree() const {
  return RootedTree::from_parents(best_root, best_parent, best_parent_weight);
}

double AnnealState::acceptance_rate() const {
  return window_filled == 0 ? 0.0
                            : static_cast<double>(window_accepts) /
                                  static_cast<double>(window_filled);
}

AnnealState make_state(const RootedTree& initial, std::span<const double> mu,
                       std::span<const double> nu, double beta0, std::size_t window) {
  AnnealState s;
  const std::size_t n = initial.vertex_count();
  s.root = initial.root();
  s.parent.assign(initial.parents().begin(), initial.parents().end());
  s.parent_weight.resize(n);
  for (Vertex v = 0; v < n; ++v) s.parent_weight[v] = initial.parent_weight(v);
  s.xi_cum = cumulative_imbalance(initial, imbalance(mu, nu));
  s.current_cost = tree_k_distance(initial, s.xi_cum);
  s.best_root = s.root;
  s.best_parent = s.parent;
  s.best_parent_weight = s.parent_weight;
  s.best_cost = s.current_cost;
  s.beta = beta0;
  s.window.assign(std::max<std::size_t>(window, 1), 0);
  return s;
}

bool propose_move(const AnnealState& state, const WeightedGraph& g, Rng& rng,
                  Candidate& cand) {
  const auto nbs = g.neighbors(state.root);
  if (nbs.empty()) return false;
  const Neighbor& pick = nbs[rng.below(nbs.size())];
  cand.new_root = pick.to;
  cand.old_root = state.root;
  cand.added_weight = pick.w;
  cand.cycle.clear();
  for (Vertex v = pick.to; v != kNoVertex; v = state.parent[v]) cand.cycle.push_back(v);
  return true;
}

double hamiltonian_delta(const AnnealState& state, const Candidate& cand) {
  const Vertex r_hat = cand.new_root;
  const double xi_hat = state.xi_cum[r_hat];
  double h = (state.parent_weight[r_hat] - cand.added_weight) * std::abs(xi_hat);
  for (std::size_t i = 1; i + 1 < cand.cycle.size(); ++i) {
    const Vertex x = cand.cycle[i];
    h += state.parent_weight[x] * (std::abs(state.xi_cum[x]) - std::abs(state.xi_cum[x] - xi_hat));
  }
  return h;
}

StepOutcome accept_step(AnnealState& state, const Candidate& cand, double u) {
  StepOutcome out;
  out.delta = hamiltonian_delta(state, cand);
  out.accepted = out.delta >= 0.0 || u <= std::exp(state.beta * out.delta);
  push_bit(state, out.accepted);
  if (!out.accepted) return out;

  const Vertex r_hat = cand.new_root;
  const Vertex r = cand.old_root;
  const double xi_hat = state.xi_cum[r_hat];
  for (std::size_t i = 1; i + 1 < cand.cycle.size(); ++i) state.xi_cum[cand.cycle[i]] -= xi_hat;
  state.xi_cum[r] = -xi_hat;
  state.xi_cum[r_hat] = 0.0;
  // Interior cycle vertices keep their parents; only the two ends change.
  state.parent[r] = r_hat;
  state.parent_weight[r] = cand.added_weight;
  state.parent[r_hat] = kNoVertex;
  state.parent_weight[r_hat] = 0.0;
  state.root = r_hat;
  state.current_cost -= out.delta;
  return out;
}

void update_temperature(AnnealState& state, const AnnealConfig& cfg) {
  if (state.window_filled < state.window.size()) return;
  const double a = state.acceptance_rate();
  state.beta = std::min(state.beta * (1.0 + cfg.eta * (a - cfg.target_accept)), kMaxBeta);
}

AnnealResult anneal_from(const WeightedGraph& g, std::span<const double> mu,
                         std::span<const double> nu, const AnnealConfig& cfg,
                         const RootedTree& initial, Rng& rng) {
  cfg.validate();
  AnnealState state = make_state(initial, mu, nu, cfg.beta0, cfg.window);
  const std::vector<double> xi = imbalance(mu, nu);
  AnnealResult result;
  auto target_hit = [&] {
    return cfg.target_cost && state.best_cost <= *cfg.target_cost + cfg.target_tol;
  };
  record(state, result.trace);
  result.reached_target = target_hit();

  Candidate cand;
  while (state.iter < cfg.max_iters && !result.reached_target) {
    if (!propose_move(state, g, rng, cand)) break;
    const double u = rng.uniform();
    accept_step(state, cand, u);
    ++state.iter;
    update_temperature(state, cfg);

    if (state.iter % kResyncEvery == 0) {
      const RootedTree t = state.tree();
      state.xi_cum = cumulative_imbalance(t, xi);
      const double fresh = tree_k_distance(t, state.xi_cum);
      result.max_drift = std::max(result.max_drift, std::abs(fresh - state.current_cost));
      state.current_cost = fresh;
    }
    if (state.current_cost < state.best_cost) {
      state.best_cost = state.current_cost;
      state.best_root = state.root;
      state.best_parent = state.parent;
      state.best_parent_weight = state.parent_weight;
    }
    result.reached_target = target_hit();
    if (state.iter % cfg.record_every == 0) record(state, result.trace);
  }
  if (state.iter % cfg.record_every != 0) record(state, result.trace);

  result.best_tree = state.best_tree();
  result.best_cost = tree_k_distance(result.best_tree, mu, nu);
  result.iterations = state.iter;
  return result;
}

AnnealResult anneal(const WeightedGraph& g, std::span<const double> mu,
                    std::span<const double> nu, const AnnealConfig& cfg) {
  Rng rng(cfg.seed);
  const RootedTree initial = random_spanning_tree(g, rng);
  return anneal_from(g, mu, nu, cfg, initial, rng);
}

AnnealResult anneal_chains(const WeightedGraph& g, std::span<const double> mu,
                           std::span<const double> nu, const AnnealConfig& cfg,
                           std::size_t chains) {
  if (chains == 0) throw Error(ErrorCode::kInvalidConfig, "need at least one chain");
  cfg.validate();
  if (chains == 1) return anneal(g, mu, nu, cfg);

  std::vector<AnnealConfig> configs(chains, cfg);
  Rng seeder(cfg.seed);
  for (AnnealConfig& c : configs) c.seed = seeder.split().next();

  std::vector<AnnealResult> results(chains);
  std::vector<std::exception_ptr> errors(chains);
  std::vector<std::thread> workers;
  workers.reserve(chains);
  for (std::size_t i = 0; i < chains; ++i) {
    workers.emplace_back([&, i] {
      try {
        results[i] = anneal(g, mu, nu, configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (std::thread& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < chains; ++i) {
    if (results[i].best_cost < results[best].best_cost) best = i;
  }
  return std::move(results[best]);
}

}  // namespace treeot
