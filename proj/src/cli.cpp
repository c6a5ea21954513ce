#include "treeot/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>

#include <json.hpp>

#include "treeot/error.hpp"
#include "treeot/grid.hpp"
#include "treeot/io.hpp"
#include "treeot/oracle.hpp"

namespace treeot::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr double kCheckTol = 1e-9;

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

io::GraphFile load_graph(const std::string& path) {
  return io::parse_graph(io::read_file(path));
}

Measure load_measure(const std::string& path, std::size_t n) {
  auto mu = io::parse_measure(io::read_file(path));
  if (mu.size() != n) {
    throw Error(ErrorCode::kInvalidMeasure, path + " has " + std::to_string(mu.size()) +
                                                " entries for " + std::to_string(n) +
                                                " vertices");
  }
  validate_measure(mu);
  return mu;
}

// Duplicate rows are summed; only positive totals are kept.
TransportPlan to_plan(const std::vector<io::PlanEntry>& entries, std::size_t n) {
  std::map<TransportPlan::Key, double> sum;
  for (const auto& e : entries) {
    if (e.x >= n || e.y >= n) {
      throw Error(ErrorCode::kVertexOutOfRange, "plan entry (" + std::to_string(e.x) + ", " +
                                                    std::to_string(e.y) + ")");
    }
    sum[{e.x, e.y}] += e.mass;
  }
  TransportPlan p(n);
  for (const auto& [k, m] : sum) p.set(k.first, k.second, m);
  return p;
}

double tree_plan_cost(const TransportPlan& p, const RootedTree& t) {
  double c = 0.0;
  for (const auto& [k, m] : p.entries()) c += m * tree_distance(t, k.first, k.second);
  return c;
}

double dual_value(const Potential& u, std::span<const double> xi) {
  double s = 0.0;
  for (std::size_t x = 0; x < xi.size(); ++x) s += u.u[x] * xi[x];
  return s;
}

struct Loaded {
  io::GraphFile graph;
  Measure mu;
  Measure nu;
};

Loaded load_pair(const std::string& graph, const std::string& mu, const std::string& nu) {
  Loaded l{load_graph(graph), {}, {}};
  const std::size_t n = l.graph.graph.vertex_count();
  l.mu = load_measure(mu, n);
  l.nu = load_measure(nu, n);
  imbalance(l.mu, l.nu);
  return l;
}

void write_outputs(const fs::path& dir,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) io::write_file(dir / name, content);
}

// Cyclical monotonicity enumerates families of support pairs; keep the family
// size affordable on large supports.
std::size_t monotonicity_depth(std::size_t support) {
  if (support <= 40) return 4;
  if (support <= 200) return 3;
  return 2;
}

}  // namespace

int cmd_grid(const GridOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto g = grid_graph(opt.p, opt.weight);
    if (!(opt.noise_sigma >= 0.0) || !std::isfinite(opt.noise_sigma)) {
      throw Error(ErrorCode::kInvalidConfig, "noise sigma must be a finite nonnegative number");
    }
    Rng rng(opt.seed);
    std::vector<std::vector<double>> images;
    for (const auto& path : opt.images) {
      std::size_t rows = 0;
      std::size_t cols = 0;
      auto pixels = io::parse_image(io::read_file(path), rows, cols);
      if (rows != opt.p || cols != opt.p) {
        throw Error(ErrorCode::kBadDimensions, path + " is " + std::to_string(rows) + "x" +
                                                   std::to_string(cols) + ", expected " +
                                                   std::to_string(opt.p) + "x" +
                                                   std::to_string(opt.p));
      }
      images.push_back(std::move(pixels));
    }
    for (std::size_t i = 0; i < opt.random_images; ++i) images.push_back(random_image(opt.p, rng));

    std::vector<std::pair<std::string, std::string>> files{{"graph.json", io::format_graph(g)}};
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto mu = image_measure(images[i], opt.p, opt.noise_sigma, rng);
      const std::string name =
          i == 0 ? "mu.json" : i == 1 ? "nu.json" : "measure_" + std::to_string(i) + ".json";
      files.emplace_back(name, io::format_measure(mu));
    }
    write_outputs(opt.out_dir, files);
    for (const auto& [name, content] : files) {
      out << (fs::path(opt.out_dir) / name).string() << "\n";
    }
    return kExitOk;
  });
}

void apply_config_json(std::string_view text, AnnealOptions& opt) {
  ordered_json j;
  try {
    j = ordered_json::parse(text.begin(), text.end());
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "config must be a JSON object");
  auto& cfg = opt.config;
  for (const auto& [key, value] : j.items()) {
    const bool number = value.is_number();
    const bool count = value.is_number_unsigned() ||
                       (value.is_number_integer() && value.get<std::int64_t>() >= 0);
    if (key == "beta0" && number) {
      cfg.beta0 = value.get<double>();
    } else if (key == "target_accept" && number) {
      cfg.target_accept = value.get<double>();
    } else if (key == "eta" && number) {
      cfg.eta = value.get<double>();
    } else if (key == "window" && count) {
      cfg.window = value.get<std::size_t>();
    } else if (key == "iters" && count) {
      cfg.max_iters = value.get<std::uint64_t>();
    } else if (key == "seed" && count) {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "record_every" && count) {
      cfg.record_every = value.get<std::uint64_t>();
    } else if (key == "chains" && count) {
      opt.chains = value.get<std::size_t>();
    } else if (key == "target_cost" && number) {
      cfg.target_cost = value.get<double>();
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown or mistyped config key \"" + key + "\"");
    }
  }
  cfg.validate();
}

int cmd_anneal(const AnnealOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    const auto in = load_pair(opt.graph, opt.mu, opt.nu);
    const auto& g = in.graph.graph;
    opt.config.validate();
    if (opt.chains == 0) throw Error(ErrorCode::kInvalidConfig, "need at least one chain");

    AnnealResult result;
    if (!opt.initial_tree.empty()) {
      if (opt.chains != 1) {
        throw Error(ErrorCode::kInvalidConfig, "an initial tree needs a single chain");
      }
      const auto t0 = io::parse_tree(io::read_file(opt.initial_tree), g);
      Rng rng(opt.config.seed);
      result = anneal_from(g, in.mu, in.nu, opt.config, t0, rng);
    } else {
      result = anneal_chains(g, in.mu, in.nu, opt.config, opt.chains);
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto& c = opt.config;
    ordered_json manifest;
    manifest["tool"] = "treeot";
    manifest["version"] = std::string(kVersion);
    manifest["command"] = "anneal";
    manifest["inputs"] = {{"graph", opt.graph},
                          {"mu", opt.mu},
                          {"nu", opt.nu},
                          {"initial_tree", opt.initial_tree.empty()
                                               ? ordered_json(nullptr)
                                               : ordered_json(opt.initial_tree)}};
    manifest["config"] = {{"seed", c.seed},
                          {"iters", c.max_iters},
                          {"beta0", c.beta0},
                          {"target_accept", c.target_accept},
                          {"eta", c.eta},
                          {"window", c.window},
                          {"record_every", c.record_every},
                          {"chains", opt.chains},
                          {"target_cost", c.target_cost ? ordered_json(*c.target_cost)
                                                        : ordered_json(nullptr)}};
    manifest["outputs"] = {"best_tree.json", "trace.csv", "manifest.json"};
    manifest["result"] = {{"best_cost", result.best_cost},
                          {"iterations", result.iterations},
                          {"reached_target", result.reached_target},
                          {"max_drift", result.max_drift}};
    manifest["wall_clock_seconds"] = seconds;

    write_outputs(opt.out_dir, {{"best_tree.json", io::format_tree(result.best_tree)},
                                {"trace.csv", io::format_trace(result.trace)},
                                {"manifest.json", manifest.dump(2) + "\n"}});
    out << io::format_number(result.best_cost) << "\n";
    return kExitOk;
  });
}

int cmd_plan(const TreeInputs& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto l = load_pair(in.graph, in.mu, in.nu);
    const auto t = io::parse_tree(io::read_file(in.tree), l.graph.graph);
    const auto plan = dp_transport_plan(t, l.mu, l.nu);
    const auto flow = plan_to_flow(plan, t);
    const auto xi_cum = cumulative_imbalance(t, imbalance(l.mu, l.nu));
    write_outputs(in.out_dir, {{"plan.csv", io::format_plan(plan)},
                               {"flow.csv", io::format_flow(t, flow)},
                               {"cumulative_imbalance.csv",
                                io::format_cumulative_imbalance(xi_cum)}});
    out << "tree_cost " << io::format_number(tree_k_distance(t, xi_cum)) << "\n"
        << "plan_cost " << io::format_number(tree_plan_cost(plan, t)) << "\n"
        << "plan_entries " << plan.size() << "\n";
    return kExitOk;
  });
}

int cmd_potential(const TreeInputs& in, SignAtZero sign, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto l = load_pair(in.graph, in.mu, in.nu);
    const auto t = io::parse_tree(io::read_file(in.tree), l.graph.graph);
    const auto u = tree_potential(t, l.mu, l.nu, sign);
    const auto verdict = check_weak_nondegeneracy(l.mu, l.nu);
    if (!verdict.passed) {
      err << "warning: the measures are not weakly non-degenerate"
          << (verdict.exhaustive ? "" : " (sampled check)")
          << "; the optimal potential need not be unique\n";
    }
    write_outputs(in.out_dir, {{"potential.csv", io::format_potential(u)}});
    out << "dual_value " << io::format_number(dual_value(u, imbalance(l.mu, l.nu))) << "\n";
    return kExitOk;
  });
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto l = load_pair(opt.graph, opt.mu, opt.nu);
    const auto& g = l.graph.graph;
    const std::size_t n = g.vertex_count();
    const auto xi = imbalance(l.mu, l.nu);

    std::optional<RootedTree> tree;
    if (!opt.tree.empty()) tree = io::parse_tree(io::read_file(opt.tree), g);
    std::optional<std::vector<io::PlanEntry>> raw_plan;
    std::optional<TransportPlan> plan;
    if (!opt.plan.empty()) {
      raw_plan = io::parse_plan(io::read_file(opt.plan));
      plan = to_plan(*raw_plan, n);
    }
    std::optional<Potential> potential;
    if (!opt.potential.empty()) potential = io::parse_potential(io::read_file(opt.potential), n);

    std::optional<DistanceMatrix> d_graph;
    if (plan || opt.exact) d_graph = all_pairs_shortest_paths(g);
    std::optional<ExactSolution> exact;
    if (opt.exact) exact = exact_k_distance(*d_graph, l.mu, l.nu);

    ordered_json checks = ordered_json::array();
    bool all = true;
    auto record = [&](const std::string& name, const CheckResult& r) {
      all = all && r.passed;
      checks.push_back(
          {{"name", name}, {"passed", r.passed}, {"worst_violation", r.worst_violation}});
    };
    auto gap_check = [](double a, double b) {
      const double gap = std::abs(a - b);
      return CheckResult{gap <= kCheckTol, gap};
    };

    ordered_json info;
    info["vertices"] = n;
    info["edges"] = g.edge_count();
    const auto nondeg = check_weak_nondegeneracy(l.mu, l.nu);
    info["weakly_nondegenerate"] = nondeg.passed;
    info["nondegeneracy_exhaustive"] = nondeg.exhaustive;

    double tree_cost = 0.0;
    if (tree) {
      tree_cost = tree_k_distance(*tree, l.mu, l.nu);
      info["tree_cost"] = tree_cost;
    }
    if (exact) {
      info["exact_value"] = exact->value;
      CheckResult cert = check_admissible(exact->plan, l.mu, l.nu);
      const auto lip = check_lipschitz(exact->dual, g);
      const auto value = gap_check(dual_value(exact->dual, xi), exact->value);
      cert.passed = cert.passed && lip.passed && value.passed;
      cert.worst_violation =
          std::max({cert.worst_violation, lip.worst_violation, value.worst_violation});
      record("exact_certificate", cert);
      if (tree) {
        info["tree_gap"] = tree_cost - exact->value;
        record("tree_cost_vs_exact", gap_check(tree_cost, exact->value));
      }
    }

    if (plan) {
      CheckResult nonneg;
      for (const auto& e : *raw_plan) {
        if (!(e.mass >= 0.0)) {
          nonneg.passed = false;
          nonneg.worst_violation = std::max(nonneg.worst_violation, std::abs(e.mass));
        }
      }
      record("plan_nonnegative", nonneg);
      record("plan_marginals", check_admissible(*plan, l.mu, l.nu));
      const double graph_cost = plan_cost(*plan, *d_graph);
      info["plan_cost_graph"] = graph_cost;
      record("plan_cyclical_monotonicity",
             check_cyclical_monotonicity(*plan, *d_graph, monotonicity_depth(plan->size())));
      if (tree) {
        record("plan_tree_cost", gap_check(tree_plan_cost(*plan, *tree), tree_cost));
        record("plan_geodesic_support", check_geodesic_support(*plan, *d_graph, *tree));
      }
      if (exact) record("plan_cost_vs_exact", gap_check(graph_cost, exact->value));
    }

    if (potential) {
      const double value = dual_value(*potential, xi);
      info["dual_value"] = value;
      record("potential_lipschitz", check_lipschitz(*potential, g));
      if (plan) record("complementary_slackness", check_complementary(*plan, *potential, *d_graph));
      if (tree) record("potential_dual_value_tree", gap_check(value, tree_cost));
      if (exact) record("potential_dual_value_vs_exact", gap_check(value, exact->value));
    }

    ordered_json verdict;
    verdict["passed"] = all;
    verdict["checks"] = std::move(checks);
    verdict["info"] = std::move(info);
    out << verdict.dump(2) << "\n";
    return all ? kExitOk : kExitVerify;
  });
}

int cmd_export_dot(const DotOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto gf = load_graph(opt.graph);
    const auto& g = gf.graph;
    std::optional<RootedTree> tree;
    if (!opt.tree.empty()) tree = io::parse_tree(io::read_file(opt.tree), g);
    std::optional<TransportPlan> plan;
    if (!opt.plan.empty()) {
      plan = to_plan(io::parse_plan(io::read_file(opt.plan)), g.vertex_count());
    }
    out << io::format_dot(g, gf.labels, tree ? &*tree : nullptr, plan ? &*plan : nullptr);
    return kExitOk;
  });
}

}  // namespace treeot::cli
