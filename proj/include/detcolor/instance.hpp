#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "detcolor/graph.hpp"
#include "detcolor/palette.hpp"
#include "detcolor/validation.hpp"

namespace detcolor {

enum class PaletteVariant { DeltaPlusOne, DegPlusOne, GeneralList };

inline const char* to_string(PaletteVariant v) {
  switch (v) {
    case PaletteVariant::DeltaPlusOne: return "delta-plus-one";
    case PaletteVariant::DegPlusOne: return "deg-plus-one";
    case PaletteVariant::GeneralList: return "general-list";
  }
  return "?";
}

// A graph together with one palette per node. Immutable after construction;
// every operation that changes palettes or topology returns a new instance.
struct ListColoringInstance {
  Graph graph;
  PaletteSet palettes;
  PaletteVariant variant = PaletteVariant::GeneralList;
  std::uint64_t color_universe = 0;  // colors live in [0, universe)

  NodeId node_count() const { return graph.node_count(); }

  std::uint64_t size_words() const { return graph.size_words() + palettes.size_words(); }
};

// Checks the standing preconditions: structural graph invariants, palette
// size strictly above degree, colors inside the universe, and the variant's
// palette shape. Violations are reported, never thrown.
inline ValidationReport validate_instance(const ListColoringInstance& inst) {
  ValidationReport report;
  const Graph& g = inst.graph;
  const NodeId n = g.node_count();

  for (NodeId v = 0; v < n; ++v) {
    auto nb = g.neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (nb[i] == v) report.add("self-loop", "node " + std::to_string(v));
      if (i + 1 < nb.size() && nb[i] >= nb[i + 1])
        report.add("adjacency-not-sorted", "node " + std::to_string(v));
      if (!g.has_edge(nb[i], v))
        report.add("asymmetric-edge",
                   std::to_string(v) + " -> " + std::to_string(nb[i]) + " has no reverse");
    }
  }

  std::uint32_t delta = g.max_degree();
  for (NodeId v = 0; v < n; ++v) {
    const std::uint64_t p = inst.palettes.size(v);
    const std::uint32_t d = g.degree(v);
    if (p <= d)
      report.add("palette-too-small", "node " + std::to_string(v) + ": |palette|=" +
                                          std::to_string(p) + " <= degree=" + std::to_string(d));
    if (inst.variant == PaletteVariant::DeltaPlusOne && p != delta + 1)
      report.add("variant-shape", "node " + std::to_string(v) +
                                      ": delta-plus-one palette has size " + std::to_string(p));
    if (inst.variant == PaletteVariant::DegPlusOne && p != d + 1)
      report.add("variant-shape", "node " + std::to_string(v) +
                                      ": deg-plus-one palette has size " + std::to_string(p));
    inst.palettes.for_each(v, [&](ColorId c) {
      if (c >= inst.color_universe) {
        report.add("color-out-of-universe",
                   "node " + std::to_string(v) + ": color " + std::to_string(c));
        return false;
      }
      return true;
    });
  }
  return report;
}

struct InducedSubinstance {
  ListColoringInstance instance;
  std::vector<NodeId> to_parent;  // new id -> parent id, a bijection onto `nodes`
};

// Subgraph induced by `nodes` (must be sorted and duplicate-free) with dense
// renumbering; palettes carry over.
inline InducedSubinstance induced_subinstance(const ListColoringInstance& inst,
                                              std::span<const NodeId> nodes) {
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (nodes[i] >= nodes[i + 1]) throw std::invalid_argument("induced: nodes must be sorted");
  InducedSubinstance out;
  out.instance.graph = inst.graph.induced(nodes);
  out.instance.palettes = inst.palettes.subset(nodes);
  out.instance.variant = inst.variant;
  out.instance.color_universe = inst.color_universe;
  out.to_parent.assign(nodes.begin(), nodes.end());
  return out;
}

// Removes, per node, the colors already used by its colored neighbors.
inline ListColoringInstance remove_used_colors(const ListColoringInstance& inst,
                                               const std::vector<std::vector<ColorId>>& used) {
  ListColoringInstance out = inst;
  out.palettes = inst.palettes.with_exclusions(used);
  return out;
}

}  // namespace detcolor
