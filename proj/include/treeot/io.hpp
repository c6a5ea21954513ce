#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treeot/annealer.hpp"
#include "treeot/graph.hpp"
#include "treeot/transport.hpp"

// Text formats. Every parser throws Error{kParse} on malformed input,
// including trailing garbage; structural problems surface as the graph/tree
// error codes.
namespace treeot::io {

struct GraphFile {
  WeightedGraph graph;
  std::vector<std::string> labels;  // empty or one per vertex
};

// {"n": N, "edges": [[u, v, w], ...], "labels": [...]?}
GraphFile parse_graph(std::string_view text);
std::string format_graph(const WeightedGraph& g, std::span<const std::string> labels = {});

// {"root": r, "edges": [[child, parent], ...]}; weights come from g.
RootedTree parse_tree(std::string_view text, const WeightedGraph& g);
std::string format_tree(const RootedTree& t);

// A JSON array of numbers, or plain numbers separated by commas, whitespace
// or newlines.
std::vector<double> parse_measure(std::string_view text);
std::string format_measure(std::span<const double> mu);

struct PlanEntry {
  Vertex x = 0;
  Vertex y = 0;
  double mass = 0.0;
};

// "x,y,mass" rows after that header. Entries are returned as written, so
// negative masses survive for the verifier to report.
std::vector<PlanEntry> parse_plan(std::string_view text);
std::string format_plan(const TransportPlan& p);

// "vertex,u" rows; every vertex in [0, n) must appear exactly once.
Potential parse_potential(std::string_view text, std::size_t n);
std::string format_potential(const Potential& u);

std::string format_trace(std::span<const TraceRecord> trace);
std::string format_flow(const RootedTree& t, const Flow& f);
std::string format_cumulative_imbalance(std::span<const double> xi_cum);

// Rows of comma-separated pixel values. cols is set to the common row length.
std::vector<double> parse_image(std::string_view text, std::size_t& rows, std::size_t& cols);

// Graph edges undirected, tree edges bold, plan entries as green arrows with
// penwidth proportional to mass. Diagonal plan entries are left out.
std::string format_dot(const WeightedGraph& g, std::span<const std::string> labels,
                       const RootedTree* tree, const TransportPlan* plan);

// Shortest decimal string that reads back to the same double.
std::string format_number(double v);

// Throw Error{kIo}.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace treeot::io
