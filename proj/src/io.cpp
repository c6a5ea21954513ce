#include "treeot/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "treeot/error.hpp"

namespace treeot::io {

namespace {

using nlohmann::json;

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

Vertex as_vertex(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0 ||
      j.get<std::int64_t>() >= static_cast<std::int64_t>(kNoVertex)) {
    throw Error(ErrorCode::kParse, std::string(what) + " must be a vertex id");
  }
  return static_cast<Vertex>(j.get<std::int64_t>());
}

double as_number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::kParse, std::string(what) + " must be a number");
  return j.get<double>();
}

const json& member(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::kParse, std::string("missing \"") + key + "\"");
  return *it;
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, std::string(what) + " must be a JSON object");
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Non-blank lines, with line numbers for diagnostics.
std::vector<std::pair<std::size_t, std::string_view>> lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t no = 0;
  for (auto line : split(text, '\n')) {
    ++no;
    line = trim(line);
    if (!line.empty()) out.emplace_back(no, line);
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::kParse,
                "line " + std::to_string(line) + ": bad number '" + std::string(tok) + "'");
  }
  return v;
}

Vertex parse_vertex(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  std::uint32_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || v == kNoVertex) {
    throw Error(ErrorCode::kParse,
                "line " + std::to_string(line) + ": bad vertex '" + std::string(tok) + "'");
  }
  return v;
}

void expect_header(const std::vector<std::pair<std::size_t, std::string_view>>& rows,
                   std::string_view header) {
  if (rows.empty() || rows.front().second != header) {
    throw Error(ErrorCode::kParse, "expected header '" + std::string(header) + "'");
  }
}

std::vector<std::string_view> fields(std::string_view line, std::size_t count,
                                     std::size_t line_no) {
  auto f = split(line, ',');
  if (f.size() != count) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(count) + " fields");
  }
  return f;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

GraphFile parse_graph(std::string_view text) {
  const json j = parse_json(text);
  require_object(j, "graph");
  const Vertex n = as_vertex(member(j, "n"), "\"n\"");
  const json& edges = member(j, "edges");
  if (!edges.is_array()) throw Error(ErrorCode::kParse, "\"edges\" must be an array");
  std::vector<Edge> list;
  list.reserve(edges.size());
  for (const json& e : edges) {
    if (!e.is_array() || e.size() != 3) {
      throw Error(ErrorCode::kParse, "graph edges must be [u, v, w] triples");
    }
    list.push_back({as_vertex(e[0], "edge endpoint"), as_vertex(e[1], "edge endpoint"),
                    as_number(e[2], "edge weight")});
  }
  GraphFile out{WeightedGraph::build(n, std::move(list)), {}};
  if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != n) {
      throw Error(ErrorCode::kParse, "\"labels\" must be an array with one entry per vertex");
    }
    for (const json& l : *it) {
      if (l.is_string()) {
        out.labels.push_back(l.get<std::string>());
      } else if (l.is_number()) {
        out.labels.push_back(l.dump());
      } else {
        throw Error(ErrorCode::kParse, "labels must be strings or numbers");
      }
    }
  }
  return out;
}

std::string format_graph(const WeightedGraph& g, std::span<const std::string> labels) {
  std::string out = "{\"n\": " + std::to_string(g.vertex_count()) + ", \"edges\": [";
  bool first = true;
  for (const Edge& e : g.edges()) {
    out += first ? "\n  " : ",\n  ";
    first = false;
    out += "[" + std::to_string(e.u) + ", " + std::to_string(e.v) + ", " + format_number(e.w) +
           "]";
  }
  out += first ? "]" : "\n]";
  if (!labels.empty()) out += ", \"labels\": " + json(labels).dump();
  return out + "}\n";
}

RootedTree parse_tree(std::string_view text, const WeightedGraph& g) {
  const json j = parse_json(text);
  require_object(j, "tree");
  const Vertex root = as_vertex(member(j, "root"), "\"root\"");
  const json& edges = member(j, "edges");
  if (!edges.is_array()) throw Error(ErrorCode::kParse, "\"edges\" must be an array");
  std::vector<std::pair<Vertex, Vertex>> list;
  for (const json& e : edges) {
    if (!e.is_array() || e.size() != 2) {
      throw Error(ErrorCode::kParse, "tree edges must be [u, v] pairs");
    }
    list.emplace_back(as_vertex(e[0], "edge endpoint"), as_vertex(e[1], "edge endpoint"));
  }
  return root_tree(g, list, root);
}

std::string format_tree(const RootedTree& t) {
  std::string out = "{\"root\": " + std::to_string(t.root()) + ", \"edges\": [";
  bool first = true;
  for (const Edge& e : t.edges()) {
    out += first ? "" : ", ";
    first = false;
    out += "[" + std::to_string(e.u) + ", " + std::to_string(e.v) + "]";
  }
  return out + "]}\n";
}

std::vector<double> parse_measure(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '[') {
    const json j = parse_json(text);
    if (!j.is_array()) throw Error(ErrorCode::kParse, "measure must be an array");
    std::vector<double> out;
    for (const json& v : j) out.push_back(as_number(v, "measure entry"));
    return out;
  }
  std::vector<double> out;
  for (const auto& [no, line] : lines(text)) {
    std::string_view rest = line;
    while (!rest.empty()) {
      const auto end = rest.find_first_of(", \t");
      const auto tok = rest.substr(0, end);
      if (!tok.empty()) out.push_back(parse_double(tok, no));
      if (end == std::string_view::npos) break;
      rest.remove_prefix(end + 1);
    }
  }
  if (out.empty()) throw Error(ErrorCode::kParse, "empty measure");
  return out;
}

std::string format_measure(std::span<const double> mu) {
  std::string out = "[";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_number(mu[i]);
  }
  return out + "]\n";
}

std::vector<PlanEntry> parse_plan(std::string_view text) {
  const auto rows = lines(text);
  expect_header(rows, "x,y,mass");
  std::vector<PlanEntry> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& [no, line] = rows[i];
    const auto f = fields(line, 3, no);
    out.push_back({parse_vertex(f[0], no), parse_vertex(f[1], no), parse_double(f[2], no)});
  }
  return out;
}

std::string format_plan(const TransportPlan& p) {
  std::string out = "x,y,mass\n";
  for (const auto& [k, m] : p.entries()) {
    out += std::to_string(k.first) + "," + std::to_string(k.second) + "," + format_number(m) +
           "\n";
  }
  return out;
}

Potential parse_potential(std::string_view text, std::size_t n) {
  const auto rows = lines(text);
  expect_header(rows, "vertex,u");
  Potential p;
  p.u.assign(n, 0.0);
  std::vector<char> seen(n, 0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& [no, line] = rows[i];
    const auto f = fields(line, 2, no);
    const Vertex v = parse_vertex(f[0], no);
    if (v >= n || seen[v]) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(no) + ": vertex " +
                                         std::to_string(v) + " out of range or repeated");
    }
    seen[v] = 1;
    p.u[v] = parse_double(f[1], no);
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(ErrorCode::kParse, "potential does not cover every vertex");
  }
  return p;
}

std::string format_potential(const Potential& u) {
  std::string out = "vertex,u\n";
  for (std::size_t v = 0; v < u.u.size(); ++v) {
    out += std::to_string(v) + "," + format_number(u.u[v]) + "\n";
  }
  return out;
}

std::string format_trace(std::span<const TraceRecord> trace) {
  std::string out = "iter,current_cost,best_cost,beta,accept_rate\n";
  for (const auto& r : trace) {
    out += std::to_string(r.iter) + "," + format_number(r.current_cost) + "," +
           format_number(r.best_cost) + "," + format_number(r.beta) + "," +
           format_number(r.accept_rate) + "\n";
  }
  return out;
}

std::string format_flow(const RootedTree& t, const Flow& f) {
  std::string out = "vertex,parent,up,down\n";
  for (Vertex v = 0; v < t.vertex_count(); ++v) {
    if (v == t.root()) continue;
    out += std::to_string(v) + "," + std::to_string(t.parent(v)) + "," + format_number(f.up[v]) +
           "," + format_number(f.down[v]) + "\n";
  }
  return out;
}

std::string format_cumulative_imbalance(std::span<const double> xi_cum) {
  std::string out = "vertex,cumulative_imbalance\n";
  for (std::size_t v = 0; v < xi_cum.size(); ++v) {
    out += std::to_string(v) + "," + format_number(xi_cum[v]) + "\n";
  }
  return out;
}

std::vector<double> parse_image(std::string_view text, std::size_t& rows, std::size_t& cols) {
  std::vector<double> out;
  rows = 0;
  cols = 0;
  for (const auto& [no, line] : lines(text)) {
    const auto f = split(line, ',');
    if (rows == 0) cols = f.size();
    if (f.size() != cols) {
      throw Error(ErrorCode::kBadDimensions,
                  "line " + std::to_string(no) + ": rows have different lengths");
    }
    for (const auto tok : f) out.push_back(parse_double(tok, no));
    ++rows;
  }
  return out;
}

std::string format_dot(const WeightedGraph& g, std::span<const std::string> labels,
                       const RootedTree* tree, const TransportPlan* plan) {
  std::ostringstream out;
  out << "digraph treeot {\n  node [shape=circle];\n";
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    out << "  " << v;
    if (!labels.empty()) out << " [label=" << dot_quote(labels[v]) << "]";
    out << ";\n";
  }
  for (const Edge& e : g.edges()) {
    const bool in_tree =
        tree != nullptr && (tree->parent(e.u) == e.v || tree->parent(e.v) == e.u);
    out << "  " << e.u << " -> " << e.v << " [dir=none, label=" << dot_quote(format_number(e.w));
    if (in_tree) {
      out << ", color=black, penwidth=3";
    } else {
      out << ", color=gray";
    }
    out << "];\n";
  }
  if (plan != nullptr) {
    double top = 0.0;
    for (const auto& [k, m] : plan->entries()) {
      if (k.first != k.second) top = std::max(top, m);
    }
    for (const auto& [k, m] : plan->entries()) {
      if (k.first == k.second) continue;
      out << "  " << k.first << " -> " << k.second << " [color=green, penwidth="
          << format_number(8.0 * m / top) << ", label=" << dot_quote(format_number(m))
          << "];\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace treeot::io
