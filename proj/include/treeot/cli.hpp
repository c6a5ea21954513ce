#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeot/annealer.hpp"
#include "treeot/transport.hpp"

// Subcommands of the treeot tool as in-process functions. Each returns the
// process exit code and writes diagnostics to err.
namespace treeot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitVerify = 3;

inline constexpr std::string_view kVersion = "0.1.0";

struct GridOptions {
  std::size_t p = 0;
  double weight = 0.0;              // <= 0: 1 / p^2
  std::vector<std::string> images;  // p x p CSV files
  std::size_t random_images = 0;    // synthetic images appended after the files
  double noise_sigma = 0.0;         // relative to the largest pixel; 0 disables
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

// Writes graph.json and one measure per image: mu.json, nu.json, then
// measure_2.json, measure_3.json, ...
int cmd_grid(const GridOptions& opt, std::ostream& out, std::ostream& err);

struct AnnealOptions {
  std::string graph;
  std::string mu;
  std::string nu;
  std::string initial_tree;  // optional; Wilson's algorithm otherwise
  AnnealConfig config;
  std::size_t chains = 1;
  std::string out_dir = ".";
};

// Applies the keys of a JSON config object (beta0, target_accept, eta, window,
// iters, seed, record_every, chains) to opt. Throws Error{kParse,
// kInvalidConfig}.
void apply_config_json(std::string_view text, AnnealOptions& opt);

// Writes best_tree.json, trace.csv and manifest.json; prints best_cost.
int cmd_anneal(const AnnealOptions& opt, std::ostream& out, std::ostream& err);

struct TreeInputs {
  std::string graph;
  std::string tree;
  std::string mu;
  std::string nu;
  std::string out_dir = ".";
};

// Writes plan.csv, flow.csv and cumulative_imbalance.csv; prints the costs.
int cmd_plan(const TreeInputs& in, std::ostream& out, std::ostream& err);

// Writes potential.csv. Warns when the measures fail the weak
// non-degeneracy check, since the potential is then not unique.
int cmd_potential(const TreeInputs& in, SignAtZero sign, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::string graph;
  std::string mu;
  std::string nu;
  std::string tree;       // optional
  std::string plan;       // optional
  std::string potential;  // optional
  bool exact = false;
};

// Prints a JSON verdict {"passed", "checks": [...], "info": {...}}; exits
// with kExitVerify when any check fails.
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

struct DotOptions {
  std::string graph;
  std::string tree;  // optional
  std::string plan;  // optional
};

int cmd_export_dot(const DotOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace treeot::cli
