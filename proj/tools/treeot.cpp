#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "treeot/cli.hpp"
#include "treeot/error.hpp"
#include "treeot/io.hpp"

using namespace treeot;

int main(int argc, char** argv) {
  CLI::App app{"Kantorovich distance on weighted graphs via optimal spanning trees"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kVersion));

  cli::GridOptions grid;
  bool noisy = false;
  auto* grid_cmd = app.add_subcommand("grid", "write a p x p lattice graph and image measures");
  grid_cmd->add_option("--p", grid.p, "side length")->required()->check(CLI::PositiveNumber);
  grid_cmd->add_option("--weight", grid.weight, "edge weight (default 1/p^2)");
  grid_cmd->add_option("--image", grid.images, "p x p CSV image, repeatable")
      ->check(CLI::ExistingFile);
  grid_cmd->add_option("--random-images", grid.random_images, "synthetic images to generate");
  grid_cmd->add_flag("--noisy", noisy, "add uniform noise before normalizing");
  auto* sigma_opt = grid_cmd->add_option("--noise-sigma", grid.noise_sigma,
                                         "noise scale relative to the largest pixel (1e-3)");
  grid_cmd->add_option("--seed", grid.seed);
  grid_cmd->add_option("--out-dir", grid.out_dir);

  cli::AnnealOptions anneal;
  std::string config_file;
  std::uint64_t iters = 0;
  double target_cost = 0.0;
  auto* anneal_cmd = app.add_subcommand("anneal", "search spanning trees by simulated annealing");
  anneal_cmd->add_option("--graph", anneal.graph)->required();
  anneal_cmd->add_option("--mu", anneal.mu)->required();
  anneal_cmd->add_option("--nu", anneal.nu)->required();
  anneal_cmd->add_option("--tree", anneal.initial_tree,
                         "initial tree (default: Wilson's algorithm)");
  anneal_cmd->add_option("--config", config_file, "JSON config; explicit flags take precedence");
  auto* seed_opt = anneal_cmd->add_option("--seed", anneal.config.seed, "random seed (0)");
  auto* iters_opt = anneal_cmd->add_option("--iters", iters, "iteration budget (100000)");
  auto* beta_opt = anneal_cmd->add_option("--beta0", anneal.config.beta0,
                                          "initial inverse temperature (0.1)");
  auto* accept_opt = anneal_cmd->add_option("--target-accept", anneal.config.target_accept,
                                            "target acceptance rate (0.01)");
  auto* eta_opt = anneal_cmd->add_option("--eta", anneal.config.eta,
                                         "temperature adaptation step (0.01)");
  auto* window_opt = anneal_cmd->add_option("--window", anneal.config.window,
                                            "acceptance-rate window (100)");
  auto* record_opt = anneal_cmd->add_option("--record-every", anneal.config.record_every,
                                            "trace row interval (1000)");
  auto* chains_opt = anneal_cmd->add_option("--chains", anneal.chains,
                                            "independent chains on threads (1)");
  auto* target_opt = anneal_cmd->add_option("--target-cost", target_cost,
                                            "stop once the best cost reaches this value");
  anneal_cmd->add_option("--out-dir", anneal.out_dir);

  cli::TreeInputs plan;
  auto* plan_cmd = app.add_subcommand("plan", "optimal transport plan for a spanning tree");
  cli::TreeInputs pot;
  std::string sign = "plus";
  auto* pot_cmd = app.add_subcommand("potential", "Kantorovich potential for a spanning tree");
  for (auto [cmd, in] : {std::pair{plan_cmd, &plan}, std::pair{pot_cmd, &pot}}) {
    cmd->add_option("--graph", in->graph)->required();
    cmd->add_option("--tree", in->tree)->required();
    cmd->add_option("--mu", in->mu)->required();
    cmd->add_option("--nu", in->nu)->required();
    cmd->add_option("--out-dir", in->out_dir);
  }
  pot_cmd->add_option("--sign-at-zero", sign, "sign used where the subtree imbalance is zero")
      ->check(CLI::IsMember({"plus", "minus"}));

  cli::VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "check plans, potentials and trees");
  verify_cmd->add_option("--graph", verify.graph)->required();
  verify_cmd->add_option("--mu", verify.mu)->required();
  verify_cmd->add_option("--nu", verify.nu)->required();
  verify_cmd->add_option("--tree", verify.tree);
  verify_cmd->add_option("--plan", verify.plan);
  verify_cmd->add_option("--potential", verify.potential);
  verify_cmd->add_flag("--exact", verify.exact, "also solve the exact transport problem");

  cli::DotOptions dot;
  auto* dot_cmd = app.add_subcommand("export-dot", "Graphviz view of a graph, tree and plan");
  dot_cmd->add_option("--graph", dot.graph)->required();
  dot_cmd->add_option("--tree", dot.tree);
  dot_cmd->add_option("--plan", dot.plan);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitInput;
  }

  if (*grid_cmd) {
    if (noisy && sigma_opt->count() == 0) grid.noise_sigma = 1e-3;
    return cli::cmd_grid(grid, std::cout, std::cerr);
  }
  if (*anneal_cmd) {
    if (!config_file.empty()) {
      // Flags given on the command line win over the file.
      const cli::AnnealOptions flags = anneal;
      try {
        cli::apply_config_json(io::read_file(config_file), anneal);
      } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitInput;
      }
      if (seed_opt->count()) anneal.config.seed = flags.config.seed;
      if (beta_opt->count()) anneal.config.beta0 = flags.config.beta0;
      if (accept_opt->count()) anneal.config.target_accept = flags.config.target_accept;
      if (eta_opt->count()) anneal.config.eta = flags.config.eta;
      if (window_opt->count()) anneal.config.window = flags.config.window;
      if (record_opt->count()) anneal.config.record_every = flags.config.record_every;
      if (chains_opt->count()) anneal.chains = flags.chains;
    }
    if (iters_opt->count()) anneal.config.max_iters = iters;
    if (target_opt->count()) anneal.config.target_cost = target_cost;
    return cli::cmd_anneal(anneal, std::cout, std::cerr);
  }
  if (*plan_cmd) return cli::cmd_plan(plan, std::cout, std::cerr);
  if (*pot_cmd) {
    return cli::cmd_potential(pot, sign == "minus" ? SignAtZero::kMinus : SignAtZero::kPlus,
                              std::cout, std::cerr);
  }
  if (*verify_cmd) return cli::cmd_verify(verify, std::cout, std::cerr);
  return cli::cmd_export_dot(dot, std::cout, std::cerr);
}
