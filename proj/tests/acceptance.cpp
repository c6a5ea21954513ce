// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "support.hpp"
#include "treeot/annealer.hpp"
#include "treeot/error.hpp"
#include "treeot/grid.hpp"
#include "treeot/io.hpp"
#include "treeot/oracle.hpp"
#include "treeot/transport.hpp"

using namespace treeot;
using namespace treeot::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = TREEOT_SOURCE_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = seconds_since(start);
  if (!o.passed) ++failures;
  std::printf("[%s] %2d %-34s %s (%.3f s)\n", o.passed ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), s);
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

struct TreeInstance {
  RootedTree tree;
  std::vector<double> mu;
  std::vector<double> nu;
};

// The seeded instances shared by criteria 2 and 3.
std::vector<TreeInstance> tree_instances() {
  Rng rng(20240601);
  std::vector<TreeInstance> out;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + rng.below(11);
    auto t = random_tree(n, rng);
    auto mu = random_measure(n, rng, i % 3 == 0);
    auto nu = random_measure(n, rng, i % 3 == 1);
    out.push_back({std::move(t), std::move(mu), std::move(nu)});
  }
  return out;
}

// Failure reason for the plan invariants, or empty when all hold.
std::string plan_invariant_failure(const TransportPlan& p, const TreeInstance& in) {
  const std::size_t n = in.mu.size();
  const auto xi_cum = cumulative_imbalance(in.tree, imbalance(in.mu, in.nu));
  if (!check_admissible(p, in.mu, in.nu, 1e-9).passed) return "marginals";
  for (Vertex x = 0; x < n; ++x) {
    if (std::abs(p.get(x, x) - std::min(in.mu[x], in.nu[x])) > 1e-9) return "diagonal";
  }
  if (has_antiparallel_pair(p)) return "antiparallel pair";
  const auto support = check_vertex_support(p);
  if (!support.is_forest || support.proper_edges > n - 1) return "support not a forest";
  const auto flow = plan_to_flow(p, in.tree);
  const auto beck = beckmann_flow(in.tree, in.mu, in.nu);
  if (max_abs_diff(flow.up, beck.up) > 1e-9 || max_abs_diff(flow.down, beck.down) > 1e-9) {
    return "flow";
  }
  if (!path_signs_hold(p, in.tree, xi_cum)) return "path signs";
  return {};
}

Outcome line_rows() {
  const auto start = Clock::now();
  double worst = 0.0;
  double worst_k = 0.0;
  for (Vertex r = 0; r < 6; ++r) {
    const auto t = line_rooted_at(6, r);
    const auto xi_cum = cumulative_imbalance(t, imbalance(kLineMu, kLineNu));
    worst = std::max(worst, max_abs_diff(xi_cum, kLineXiRows[r]));
    worst_k = std::max(worst_k, std::abs(tree_k_distance(t, xi_cum) - 0.75));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-12 && worst_k <= 1e-12 && elapsed < 1e-3,
          "rows " + fmt(worst) + ", K " + fmt(worst_k) + ", " + fmt(elapsed * 1e3) + " ms"};
}

Outcome tree_oracle(const std::vector<TreeInstance>& instances) {
  const auto start = Clock::now();
  double worst = 0.0;
  for (const auto& in : instances) {
    const double k = tree_k_distance(in.tree, in.mu, in.nu);
    const auto d_tree = tree_distance_matrix(in.tree);
    const double exact = exact_k_distance(d_tree, in.mu, in.nu).value;
    const double dp = plan_cost(dp_transport_plan(in.tree, in.mu, in.nu), d_tree);
    worst = std::max({worst, std::abs(k - exact), std::abs(dp - exact), std::abs(dp - k)});
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-9 && elapsed < 10.0, "200 trees, worst gap " + fmt(worst)};
}

Outcome dp_invariants(const std::vector<TreeInstance>& instances) {
  int bad = 0;
  std::string first;
  for (const auto& in : instances) {
    const auto why = plan_invariant_failure(dp_transport_plan(in.tree, in.mu, in.nu), in);
    if (!why.empty()) {
      if (bad++ == 0) first = why;
    }
  }
  return {bad == 0, std::to_string(bad) + " failures" + (first.empty() ? "" : " (" + first + ")")};
}

Outcome potential_suite() {
  Rng rng(777);
  int done = 0;
  int bad = 0;
  int skipped = 0;
  double worst_shift = 0.0;
  double worst_value = 0.0;
  double worst_edge = 0.0;
  while (done < 100) {
    const std::size_t n = 2 + rng.below(11);
    const auto t = random_tree(n, rng);
    const auto mu = random_measure(n, rng);
    const auto nu = random_measure(n, rng);
    const auto verdict = check_weak_nondegeneracy(mu, nu);
    if (!verdict.passed || !verdict.exhaustive) {
      ++skipped;
      continue;
    }
    ++done;
    const auto u = tree_potential(t, mu, nu);
    const auto exact = exact_k_distance(tree_distance_matrix(t), mu, nu);
    const auto shift = potential_match_up_to_constant(u, exact.dual, 1e-6);
    const double value = std::abs(dot(u.u, imbalance(mu, nu)) - tree_k_distance(t, mu, nu));
    double edge = 0.0;
    for (const Edge& e : t.edges()) {
      edge = std::max(edge, std::abs(std::abs(u.u[e.u] - u.u[e.v]) - e.w));
    }
    worst_shift = std::max(worst_shift, shift.worst_violation);
    worst_value = std::max(worst_value, value);
    worst_edge = std::max(worst_edge, edge);
    if (!shift.passed || value > 1e-9 || edge > 1e-9) ++bad;
  }
  return {bad == 0, "100 certified (" + std::to_string(skipped) + " skipped), dual " +
                        fmt(worst_shift) + ", value " + fmt(worst_value) + ", edges " +
                        fmt(worst_edge)};
}

Outcome hamiltonian_pairs() {
  Rng rng(31337);
  const auto g = grid_graph(5);
  int pairs = 0;
  double worst_h = 0.0;
  double worst_xi = 0.0;
  for (int grid = 0; grid < 50; ++grid) {
    const auto mu = random_measure(25, rng, grid % 2 == 0);
    const auto nu = random_measure(25, rng);
    auto state = make_state(random_spanning_tree(g, rng), mu, nu, 0.1, 100);
    for (int step = 0; step < 20; ++step) {
      Candidate c;
      propose_move(state, g, rng, c);
      // Candidate tree from scratch: drop the edge above new_root, link the
      // old root to it and root there.
      std::vector<Edge> edges;
      for (Vertex v = 0; v < 25; ++v) {
        if (v == state.root || v == c.new_root) continue;
        edges.push_back({v, state.parent[v], state.parent_weight[v]});
      }
      edges.push_back({c.old_root, c.new_root, c.added_weight});
      const auto next = root_tree(25, edges, c.new_root);
      const double before = tree_k_distance(state.tree(), mu, nu);
      const double after = tree_k_distance(next, mu, nu);
      worst_h = std::max(worst_h, std::abs(hamiltonian_delta(state, c) - (before - after)));
      accept_step(state, c, 0.0);
      const auto recomputed = cumulative_imbalance(next, imbalance(mu, nu));
      worst_xi = std::max(worst_xi, max_abs_diff(state.xi_cum, recomputed));
      ++pairs;
    }
  }
  return {pairs == 1000 && worst_h <= 1e-9 && worst_xi <= 1e-9,
          std::to_string(pairs) + " pairs, H " + fmt(worst_h) + ", Xi " + fmt(worst_xi)};
}

struct SaRun {
  WeightedGraph graph;
  std::vector<double> mu;
  std::vector<double> nu;
  DistanceMatrix d_graph;
  double exact = 0.0;
  AnnealResult result;
  bool reached = false;
};

SaRun run_sa(WeightedGraph g, std::vector<double> mu, std::vector<double> nu,
             std::uint64_t seed, std::uint64_t iters) {
  SaRun run{std::move(g), std::move(mu), std::move(nu), DistanceMatrix(0), 0.0, {}, false};
  run.d_graph = all_pairs_shortest_paths(run.graph);
  run.exact = exact_k_distance(run.d_graph, run.mu, run.nu).value;
  AnnealConfig cfg;  // beta0 0.1, target_accept 0.01, eta 0.01, window 100
  cfg.seed = seed;
  cfg.max_iters = iters;
  cfg.record_every = iters;
  run.result = anneal(run.graph, run.mu, run.nu, cfg);
  run.reached = std::abs(run.result.best_cost - run.exact) <= 1e-9;
  return run;
}

std::vector<double> bundled_image(const std::string& name) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  return io::parse_image(io::read_file(kSource / "data" / name), rows, cols);
}

std::vector<SaRun> sa_runs;

Outcome sa_convergence() {
  auto start = Clock::now();
  int hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng data(1000 + s);
    auto mu = image_measure(random_image(4, data), 4, 1e-3, data);
    auto nu = image_measure(random_image(4, data), 4, 1e-3, data);
    sa_runs.push_back(run_sa(grid_graph(4, 1.0 / 16.0), std::move(mu), std::move(nu), s, 200000));
    hits += sa_runs.back().reached;
  }
  const double small = seconds_since(start);

  // The 7x7 gate uses one fixed seed. The same instance is also run for
  // seeds 0..19 so the per-seed hit rate is visible next to the verdict.
  start = Clock::now();
  constexpr std::uint64_t kSevenSeed = 2;
  Rng data(49);
  const auto mu = image_measure(bundled_image("zero_7x7.csv"), 7, 1e-3, data);
  const auto nu = image_measure(bundled_image("seven_7x7.csv"), 7, 1e-3, data);
  bool gate = false;
  double gate_gap = 0.0;
  int seven_hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto run = run_sa(grid_graph(7), mu, nu, s, 1000000);
    seven_hits += run.reached;
    if (s == kSevenSeed) {
      gate = run.reached;
      gate_gap = run.result.best_cost - run.exact;
    }
    sa_runs.push_back(std::move(run));
  }
  const double large = seconds_since(start);
  return {hits >= 19 && small < 60.0 && gate && large < 600.0,
          "4x4: " + std::to_string(hits) + "/20 exact in " + fmt(small) + " s; 7x7 seed " +
              std::to_string(kSevenSeed) + ": gap " + fmt(gate_gap) + " (" +
              std::to_string(seven_hits) + "/20 seeds exact) in " + fmt(large) + " s"};
}

Outcome plan_on_sa_tree() {
  int checked = 0;
  int bad = 0;
  double worst = 0.0;
  for (const auto& run : sa_runs) {
    if (!run.reached) continue;
    ++checked;
    const auto& t = run.result.best_tree;
    const auto plan = dp_transport_plan(t, run.mu, run.nu);
    const auto geo = check_geodesic_support(plan, run.d_graph, t);
    const double gap = std::abs(plan_cost(plan, run.d_graph) - run.exact);
    worst = std::max({worst, geo.worst_violation, gap});
    if (!geo.passed || gap > 1e-9) ++bad;
  }
  return {checked > 0 && bad == 0, std::to_string(checked) + " optimal trees, " +
                                       std::to_string(bad) + " failures, worst " + fmt(worst)};
}

Outcome line_equivalence() {
  Rng rng(88);
  double worst_tree = 0.0;
  double worst_exact = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> points(n);
    double x = rng.uniform() * 10.0 - 5.0;
    for (auto& p : points) {
      p = x;
      x += 1.0 - rng.uniform();
    }
    const auto mu = random_measure(n, rng, i % 2 == 0);
    const auto nu = random_measure(n, rng);
    const double w = line_w1(points, mu, nu);
    worst_tree = std::max(worst_tree, std::abs(w - tree_k_distance(line_tree(points), mu, nu)));
    DistanceMatrix d(n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) d(a, b) = std::abs(points[a] - points[b]);
    }
    worst_exact = std::max(worst_exact, std::abs(w - exact_k_distance(d, mu, nu).value));
  }
  return {worst_tree <= 1e-12 && worst_exact <= 1e-9,
          "100 sets, tree " + fmt(worst_tree) + ", exact " + fmt(worst_exact)};
}

// Measures whose cumulative imbalance on t has sign (-1)^depth.
TreeInstance alternating_instance(std::size_t n, Rng& rng) {
  auto t = random_tree(n, rng);
  std::vector<double> xi_cum(n, 0.0);
  for (Vertex v = 0; v < n; ++v) {
    if (v != t.root()) xi_cum[v] = (t.depth(v) % 2 == 0 ? 1.0 : -1.0) * (0.05 + rng.uniform());
  }
  std::vector<double> mu(n);
  std::vector<double> nu(n);
  double total = 0.0;
  for (Vertex v = 0; v < n; ++v) {
    double xi = xi_cum[v];
    for (Vertex c : t.children(v)) xi -= xi_cum[c];
    const double base = rng.below(3) == 0 ? 0.0 : rng.uniform();
    mu[v] = std::max(xi, 0.0) + base;
    nu[v] = std::max(-xi, 0.0) + base;
    total += mu[v];
  }
  for (Vertex v = 0; v < n; ++v) {
    mu[v] /= total;
    nu[v] /= total;
  }
  return {std::move(t), std::move(mu), std::move(nu)};
}

Outcome closed_form_gate() {
  Rng rng(4242);
  int bad = 0;
  int gated = 0;
  std::string first;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto in = alternating_instance(2 + rng.below(11), rng);
    if (!check_alternating_condition(in.tree, in.mu, in.nu)) {
      if (bad++ == 0) first = "constructed instance not alternating";
      continue;
    }
    ++gated;
    const auto cf = closed_form_plan(in.tree, in.mu, in.nu);
    const auto d = tree_distance_matrix(in.tree);
    const auto dp = dp_transport_plan(in.tree, in.mu, in.nu);
    const double gap = std::abs(plan_cost(cf, d) - plan_cost(dp, d));
    worst = std::max(worst, gap);
    auto why = gap > 1e-9 ? std::string("cost") : plan_invariant_failure(cf, in);
    if (!why.empty() && bad++ == 0) first = why;
  }
  int raised = 0;
  for (Vertex r = 0; r < 6; ++r) {
    try {
      closed_form_plan(line_rooted_at(6, r), kLineMu, kLineNu);
    } catch (const Error& e) {
      raised += e.code() == ErrorCode::kConditionViolated;
    }
  }
  return {bad == 0 && raised == 6,
          std::to_string(gated) + " alternating, " + std::to_string(bad) + " failures" +
              (first.empty() ? "" : " (" + first + ")") + ", cost gap " + fmt(worst) +
              ", line raised " + std::to_string(raised) + "/6"};
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_pipeline() {
  const std::string bin = TREEOT_BIN;
  const auto root = fs::temp_directory_path() / "treeot_acceptance_cli";
  fs::remove_all(root);
  const std::string one = (kSource / "data" / "one_4x4.csv").string();
  const std::string seven = (kSource / "data" / "seven_4x4.csv").string();
  const std::vector<std::string> steps{
      "grid --p 4 --image " + one + " --image " + seven + " --noisy --seed 7 > grid.txt",
      "anneal --graph graph.json --mu mu.json --nu nu.json --seed 7 --iters 200000 > anneal.txt",
      "plan --graph graph.json --tree best_tree.json --mu mu.json --nu nu.json > plan.txt",
      "potential --graph graph.json --tree best_tree.json --mu mu.json --nu nu.json "
      "> potential.txt 2> potential.err",
      "verify --graph graph.json --mu mu.json --nu nu.json --tree best_tree.json "
      "--plan plan.csv --potential potential.csv --exact > verdict.json",
  };
  for (const char* run : {"a", "b"}) {
    const auto dir = root / run;
    fs::create_directories(dir);
    for (const auto& step : steps) {
      const int code = shell("cd '" + dir.string() + "' && '" + bin + "' " + step);
      if (code != 0) return {false, "exit " + std::to_string(code) + " from: " + step};
    }
  }
  const auto verdict = nlohmann::json::parse(io::read_file(root / "a" / "verdict.json"));
  if (verdict["passed"] != true) return {false, "verification failed"};

  // The manifest's wall-clock line is the only field allowed to differ.
  auto without_clock = [](std::string text) {
    std::istringstream in(text);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
      if (line.find("\"wall_clock_seconds\"") == std::string::npos) out += line + "\n";
    }
    return out;
  };
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    const auto other = root / "b" / name;
    if (!fs::exists(other)) return {false, "missing in second run: " + name.string()};
    auto a = io::read_file(entry.path());
    auto b = io::read_file(other);
    if (name == "manifest.json") {
      a = without_clock(a);
      b = without_clock(b);
    }
    if (a != b) return {false, "outputs differ: " + name.string()};
    ++files;
  }
  return {true, std::to_string(verdict["checks"].size()) + " checks passed, " +
                    std::to_string(files) + " files identical"};
}

}  // namespace

int main() {
  const auto instances = tree_instances();
  report(1, "six-vertex line imbalance", line_rows);
  report(2, "tree cost vs exact oracle", [&] { return tree_oracle(instances); });
  report(3, "dp plan invariants", [&] { return dp_invariants(instances); });
  report(4, "potential vs oracle dual", potential_suite);
  report(5, "incremental hamiltonian", hamiltonian_pairs);
  report(6, "annealing reaches exact value", sa_convergence);
  report(7, "plan on annealed tree", plan_on_sa_tree);
  report(8, "line distance equivalence", line_equivalence);
  report(9, "closed-form plan gate", closed_form_gate);
  report(10, "cli pipeline reproducibility", cli_pipeline);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
