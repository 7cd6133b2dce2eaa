#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "detcolor/instance.hpp"

namespace detcolor {

constexpr std::int64_t kUncolored = -1;

struct ColoringAssignment {
  std::vector<std::int64_t> color;  // kUncolored when unassigned
  bool complete = false;

  explicit ColoringAssignment(NodeId n = 0) : color(n, kUncolored) {}

  bool assigned(NodeId v) const { return color[v] != kUncolored; }
};

// Reports every monochromatic edge, every off-palette assignment, and (when
// the assignment claims completeness) every uncolored node.
inline ValidationReport validate_coloring(const ListColoringInstance& inst,
                                          const ColoringAssignment& a) {
  ValidationReport report;
  const NodeId n = inst.node_count();
  for (NodeId v = 0; v < n; ++v) {
    if (!a.assigned(v)) {
      if (a.complete) report.add("uncolored-node", "node " + std::to_string(v));
      continue;
    }
    const ColorId c = static_cast<ColorId>(a.color[v]);
    if (!inst.palettes.contains(v, c))
      report.add("off-palette", "node " + std::to_string(v) + " colored " + std::to_string(c));
    for (NodeId u : inst.graph.neighbors(v))
      if (u > v && a.assigned(u) && a.color[u] == a.color[v])
        report.add("monochromatic-edge", std::to_string(v) + " -- " + std::to_string(u) +
                                             " both " + std::to_string(c));
  }
  return report;
}

struct GreedyResult {
  ColoringAssignment assignment;
  bool ok = true;
  NodeId stuck_node = 0;
};

// Sequential first-fit in the given node order: each node takes the smallest
// palette color unused by its already-colored neighbors. Cannot get stuck
// when every palette is larger than the node's degree.
inline GreedyResult greedy_color(const ListColoringInstance& inst,
                                 std::span<const NodeId> order) {
  const NodeId n = inst.node_count();
  GreedyResult res{ColoringAssignment(n)};
  std::unordered_set<ColorId> used;
  for (NodeId v : order) {
    used.clear();
    for (NodeId u : inst.graph.neighbors(v))
      if (res.assignment.assigned(u)) used.insert(static_cast<ColorId>(res.assignment.color[u]));
    bool placed = false;
    inst.palettes.for_each(v, [&](ColorId c) {
      if (used.contains(c)) return true;
      res.assignment.color[v] = static_cast<std::int64_t>(c);
      placed = true;
      return false;
    });
    if (!placed) {
      res.ok = false;
      res.stuck_node = v;
      return res;
    }
  }
  res.assignment.complete = true;
  return res;
}

inline std::vector<NodeId> identity_order(NodeId n) {
  std::vector<NodeId> order(n);
  for (NodeId v = 0; v < n; ++v) order[v] = v;
  return order;
}

}  // namespace detcolor
