#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "detcolor/coloring.hpp"
#include "detcolor/instance.hpp"

namespace detcolor {

// Malformed input files raise ParseError with a 1-based line number.
struct ParseError : std::runtime_error {
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what) {}
};

namespace io {

// Graph file: line 1 "graph <n> <m>", then m lines "<u> <v>" with 0-based ids.
inline void write_graph(std::ostream& out, const Graph& g) {
  out << "graph " << g.node_count() << ' ' << g.edge_count() << '\n';
  for (NodeId v = 0; v < g.node_count(); ++v)
    for (NodeId u : g.neighbors(v))
      if (v < u) out << v << ' ' << u << '\n';
}

inline Graph read_graph(std::istream& in, const std::string& path = "<graph>") {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++lineno;
  std::istringstream head(line);
  std::string tag;
  std::uint64_t n = 0, m = 0;
  if (!(head >> tag >> n >> m) || tag != "graph")
    throw ParseError(path, lineno, "expected 'graph <n> <m>'");
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw ParseError(path, lineno + 1, "missing edge line");
    ++lineno;
    std::istringstream row(line);
    std::uint64_t u, v;
    if (!(row >> u >> v)) throw ParseError(path, lineno, "expected '<u> <v>'");
    if (u >= n || v >= n) throw ParseError(path, lineno, "edge endpoint out of range");
    if (u == v) throw ParseError(path, lineno, "self-loop");
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return Graph::from_edges(static_cast<NodeId>(n), edges);
}

// Palette file: line 1 "palette <n>", then n lines "<v> <k> <c1> ... <ck>".
inline void write_palettes(std::ostream& out, const PaletteSet& p) {
  out << "palette " << p.node_count() << '\n';
  for (NodeId v = 0; v < p.node_count(); ++v) {
    auto colors = p.materialize(v);
    out << v << ' ' << colors.size();
    for (ColorId c : colors) out << ' ' << c;
    out << '\n';
  }
}

inline PaletteSet read_palettes(std::istream& in, const std::string& path = "<palette>") {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++lineno;
  std::istringstream head(line);
  std::string tag;
  std::uint64_t n = 0;
  if (!(head >> tag >> n) || tag != "palette")
    throw ParseError(path, lineno, "expected 'palette <n>'");
  std::vector<std::vector<ColorId>> lists(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ParseError(path, lineno + 1, "missing palette line");
    ++lineno;
    std::istringstream row(line);
    std::uint64_t v, k;
    if (!(row >> v >> k)) throw ParseError(path, lineno, "expected '<v> <k> <c...>'");
    if (v >= n) throw ParseError(path, lineno, "node id out of range");
    lists[v].reserve(k);
    for (std::uint64_t j = 0; j < k; ++j) {
      ColorId c;
      if (!(row >> c)) throw ParseError(path, lineno, "missing color entry");
      lists[v].push_back(c);
    }
  }
  return PaletteSet::packed(std::move(lists));
}

// Assignment file: n lines "<v> <color>".
inline void write_assignment(std::ostream& out, const ColoringAssignment& a) {
  for (NodeId v = 0; v < a.color.size(); ++v) out << v << ' ' << a.color[v] << '\n';
}

inline ColoringAssignment read_assignment(std::istream& in, NodeId n,
                                          const std::string& path = "<assignment>") {
  ColoringAssignment a(n);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::uint64_t v;
    std::int64_t c;
    if (!(row >> v >> c)) throw ParseError(path, lineno, "expected '<v> <color>'");
    if (v >= n) throw ParseError(path, lineno, "node id out of range");
    a.color[v] = c;
  }
  a.complete = true;
  for (NodeId v = 0; v < n; ++v)
    if (!a.assigned(v)) a.complete = false;
  return a;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
}

}  // namespace io
}  // namespace detcolor
