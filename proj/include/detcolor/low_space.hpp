#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "detcolor/mpc_sim.hpp"
#include "detcolor/partition.hpp"

namespace detcolor {

// Parameters of the sublinear-regime pipeline. The degree threshold
// T = n^{7*delta} separates the low-degree residue (solved through the MIS
// reduction) from the binned remainder; k = floor(n^delta) node bins share
// k-1 color bins. Desk-scale runs may override T to force interesting
// splits; the override is recorded and reported.
struct LowSpaceParams {
  double eps = 0;
  double delta_exp = 0;
  std::uint32_t n_root = 0;
  std::uint64_t degree_threshold = 0;  // T
  std::uint64_t bin_count = 1;         // k
  std::uint64_t color_bin_count = 0;   // k - 1
  bool threshold_overridden = false;

  double n_to_delta() const { return std::pow(static_cast<double>(n_root), delta_exp); }
};

inline LowSpaceParams derive_low_space_params(std::uint32_t n, double eps, double delta,
                                              std::uint64_t threshold_override = 0) {
  if (!(delta > 0) || !(delta <= eps / 22.0) || !(eps / 22.0 < 1.0))
    throw std::invalid_argument("low-space params: need 0 < delta <= eps/22 < 1");
  LowSpaceParams p;
  p.eps = eps;
  p.delta_exp = delta;
  p.n_root = n;
  p.bin_count = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(n), delta))));
  p.color_bin_count = p.bin_count - 1;
  p.degree_threshold =
      threshold_override
          ? threshold_override
          : static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(n), 7.0 * delta)));
  p.threshold_overridden = threshold_override != 0;
  return p;
}

// A machine holding one contiguous slice of an owner's neighbor list or
// materialized palette. Slices partition the owner's list exactly, each of
// size between T and 2T.
struct MachineGroup {
  NodeId owner = 0;
  bool color_kind = false;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;

  std::uint32_t held() const { return end - begin; }
};

namespace detail {

inline void split_into_groups(NodeId owner, bool color_kind, std::uint64_t total,
                              std::uint64_t threshold, std::vector<MachineGroup>& out) {
  const std::uint64_t cap = 2 * threshold;
  const std::uint64_t g = (total + cap - 1) / cap;  // ceil(total / 2T)
  std::uint64_t begin = 0;
  for (std::uint64_t i = 0; i < g; ++i) {
    const std::uint64_t len = total / g + (i < total % g ? 1 : 0);
    out.push_back({owner, color_kind, static_cast<std::uint32_t>(begin),
                   static_cast<std::uint32_t>(begin + len)});
    begin += len;
  }
}

}  // namespace detail

// Neighbor groups for every node above the degree threshold; color groups
// for the same owners (their palettes are larger than their degrees, hence
// also above the threshold). Whether a color group participates under a
// given seed depends on the owner's bin, which the classifier handles.
inline std::vector<MachineGroup> form_machine_groups(const ListColoringInstance& inst,
                                                     const LowSpaceParams& params) {
  std::vector<MachineGroup> groups;
  for (NodeId v = 0; v < inst.node_count(); ++v) {
    const std::uint64_t d = inst.graph.degree(v);
    if (d <= params.degree_threshold) continue;
    detail::split_into_groups(v, false, d, params.degree_threshold, groups);
    detail::split_into_groups(v, true, inst.palettes.size(v), params.degree_threshold, groups);
  }
  return groups;
}

// Machine goodness, evaluated exactly (n_to_delta is the real n^delta):
//   neighbor machine: |d'(x) - d(x) n^-delta| <= d(x)^0.6
//   color machine:     p'(x) > p(x) n^-delta + p(x)^0.7
inline bool neighbor_machine_good(std::uint64_t held_in_bin, std::uint64_t held,
                                  double n_to_delta) {
  const double d = static_cast<double>(held);
  return guarded_leq(std::fabs(static_cast<double>(held_in_bin) - d / n_to_delta),
                     std::pow(d, 0.6));
}

inline bool color_machine_good(std::uint64_t held_in_bin, std::uint64_t held, double n_to_delta) {
  const double p = static_cast<double>(held);
  return static_cast<double>(held_in_bin) > p / n_to_delta + std::pow(p, 0.7);
}

struct MachineClassification {
  std::vector<std::uint8_t> exists;  // color groups of bin-k owners do not participate
  std::vector<std::uint8_t> good;
  std::vector<std::uint64_t> in_bin;  // realized d'(x) or p'(x)
  std::vector<std::uint64_t> bins;    // bin per node (1-based; 0 = below threshold)

  std::uint64_t bad_count() const {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < good.size(); ++i) c += exists[i] && !good[i];
    return c;
  }
};

// Definition of good machines, evaluated exactly:
//   neighbor machine: |d'(x) - d(x) n^-delta| <= d(x)^0.6
//   color machine:     p'(x) > p(x) n^-delta + p(x)^0.7
inline MachineClassification classify_machines(const ListColoringInstance& inst,
                                               const std::vector<MachineGroup>& groups,
                                               const LowSpaceParams& params,
                                               const HashFamilyParams& h1, const BitString& seed1,
                                               const HashFamilyParams& h2, const BitString& seed2) {
  const NodeId n = inst.node_count();
  const std::uint64_t k = params.bin_count;

  MachineClassification mc;
  mc.exists.assign(groups.size(), 0);
  mc.good.assign(groups.size(), 0);
  mc.in_bin.assign(groups.size(), 0);
  mc.bins.assign(n, 0);
  for (NodeId v = 0; v < n; ++v)
    if (inst.graph.degree(v) > params.degree_threshold)
      mc.bins[v] = hash_evaluate_range(h1, seed1, v, RangeSpec{k}) + 1;

  // One color-bin evaluation per color in the span, not per palette entry.
  std::vector<std::uint32_t> color_bin_table;
  const ColorId span = inst.palettes.color_span();
  if (params.color_bin_count >= 1 && span <= (ColorId{1} << 22)) {
    color_bin_table.resize(span);
    for (ColorId c = 0; c < span; ++c)
      color_bin_table[c] = static_cast<std::uint32_t>(
          hash_evaluate_range(h2, seed2, c, RangeSpec{params.color_bin_count}) + 1);
  }
  auto color_bin = [&](ColorId c) -> std::uint64_t {
    return color_bin_table.empty()
               ? hash_evaluate_range(h2, seed2, c, RangeSpec{params.color_bin_count}) + 1
               : color_bin_table[c];
  };

  std::vector<std::vector<ColorId>> palette_cache(n);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const MachineGroup& g = groups[i];
    const std::uint64_t owner_bin = mc.bins[g.owner];
    if (g.color_kind) {
      if (owner_bin == k || params.color_bin_count == 0) continue;  // no color share for bin k
      mc.exists[i] = 1;
      // plain range palettes index directly; anything filtered materializes once
      const bool plain_range = inst.palettes.base_kind() == PaletteSet::BaseKind::Range &&
                               inst.palettes.chain().empty() &&
                               inst.palettes.exclusions(g.owner).empty();
      const std::vector<ColorId>* colors = nullptr;
      if (!plain_range) {
        auto& cached = palette_cache[g.owner];
        if (cached.empty()) cached = inst.palettes.materialize(g.owner);
        colors = &cached;
      }
      std::uint64_t cnt = 0;
      for (std::uint32_t j = g.begin; j < g.end; ++j) {
        const ColorId c = plain_range ? j : (*colors)[j];
        cnt += color_bin(c) == owner_bin;
      }
      mc.in_bin[i] = cnt;
      mc.good[i] = color_machine_good(cnt, g.held(), params.n_to_delta());
    } else {
      mc.exists[i] = 1;
      auto nb = inst.graph.neighbors(g.owner);
      std::uint64_t cnt = 0;
      for (std::uint32_t j = g.begin; j < g.end; ++j) {
        const NodeId u = nb[j];
        // below-threshold neighbors live in G0 and belong to no bin
        cnt += inst.graph.degree(u) > params.degree_threshold && mc.bins[u] == owner_bin;
      }
      mc.in_bin[i] = cnt;
      mc.good[i] = neighbor_machine_good(cnt, g.held(), params.n_to_delta());
    }
  }
  return mc;
}

inline std::uint64_t cost_eq2(const MachineClassification& mc) { return mc.bad_count(); }

struct NodeGuarantees {
  std::vector<std::uint64_t> degree_in_bin;   // d'(v), summed over neighbor groups
  std::vector<std::uint64_t> palette_in_bin;  // p'(v), summed over color groups
  ValidationReport report;
};

// Per-node consequences of an all-good machine classification: for every
// binned node, d'(v) < 2 d(v) n^-delta; for binned nodes outside bin k,
// p'(v) > d'(v). Refuses to aggregate when any machine is bad.
inline NodeGuarantees aggregate_node_guarantees(const ListColoringInstance& inst,
                                                const std::vector<MachineGroup>& groups,
                                                const MachineClassification& mc,
                                                const LowSpaceParams& params) {
  if (mc.bad_count() != 0)
    throw std::invalid_argument("aggregate_node_guarantees: requires a zero-cost seed");
  const NodeId n = inst.node_count();
  NodeGuarantees ng;
  ng.degree_in_bin.assign(n, 0);
  ng.palette_in_bin.assign(n, 0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!mc.exists[i]) continue;
    auto& slot = groups[i].color_kind ? ng.palette_in_bin : ng.degree_in_bin;
    slot[groups[i].owner] += mc.in_bin[i];
  }
  const double inv = 1.0 / params.n_to_delta();
  for (NodeId v = 0; v < n; ++v) {
    if (mc.bins[v] == 0) continue;  // below threshold
    const double d = inst.graph.degree(v);
    if (!(static_cast<double>(ng.degree_in_bin[v]) < 2.0 * d * inv))
      ng.report.add("degree-contraction", "node " + std::to_string(v) + ": d'=" +
                                              std::to_string(ng.degree_in_bin[v]) +
                                              " >= " + std::to_string(2.0 * d * inv));
    if (mc.bins[v] != params.bin_count &&
        !(ng.palette_in_bin[v] > ng.degree_in_bin[v]))
      ng.report.add("palette-margin", "node " + std::to_string(v) + ": p'=" +
                                          std::to_string(ng.palette_in_bin[v]) +
                                          " <= d'=" + std::to_string(ng.degree_in_bin[v]));
  }
  return ng;
}

class LowSpacePairCost final : public CostFunction {
 public:
  LowSpacePairCost(const ListColoringInstance& inst, const std::vector<MachineGroup>& groups,
                   const LowSpaceParams& params, HashFamilyParams h1, HashFamilyParams h2)
      : inst_(inst), groups_(groups), params_(params), h1_(h1), h2_(h2) {}

  int seed_bits() const override { return h1_.seed_bits() + h2_.seed_bits(); }

  std::uint64_t evaluate(const BitString& seed) const override {
    const auto [s1, s2] = split(seed);
    return cost_eq2(classify_machines(inst_, groups_, params_, h1_, s1, h2_, s2));
  }

  std::pair<BitString, BitString> split(const BitString& seed) const {
    BitString s1(h1_.seed_bits()), s2(h2_.seed_bits());
    for (int i = 0; i < h1_.seed_bits(); ++i) s1.set_bit(i, seed.bit(i));
    for (int i = 0; i < h2_.seed_bits(); ++i) s2.set_bit(i, seed.bit(h1_.seed_bits() + i));
    return {s1, s2};
  }

 private:
  const ListColoringInstance& inst_;
  const std::vector<MachineGroup>& groups_;
  LowSpaceParams params_;
  HashFamilyParams h1_, h2_;
};

struct LsPartitionOutcome {
  std::vector<NodeId> low_degree_nodes;        // V0, parent-local ids
  std::vector<std::vector<NodeId>> bin_nodes;  // index 1..k
  std::vector<InducedSubinstance> children;    // 0 = G0 (low degree), 1..k bins
  MachineClassification machines;
  BitString seed1, seed2;
};

// One LowSpacePartition step: nodes at or below the degree threshold form
// G0; the rest are binned by h1; palettes of bins 1..k-1 are restricted by
// h2 and materialized (the sublinear lane stores palettes explicitly).
inline LsPartitionOutcome ls_partition(const ListColoringInstance& inst,
                                       const LowSpaceParams& params,
                                       const std::vector<MachineGroup>& groups,
                                       const HashFamilyParams& h1, const BitString& seed1,
                                       const HashFamilyParams& h2, const BitString& seed2) {
  if (params.bin_count < 2)
    throw std::invalid_argument("ls_partition: degenerate bin count");
  LsPartitionOutcome out;
  out.seed1 = seed1;
  out.seed2 = seed2;
  out.machines = classify_machines(inst, groups, params, h1, seed1, h2, seed2);
  out.bin_nodes.assign(params.bin_count + 1, {});
  for (NodeId v = 0; v < inst.node_count(); ++v) {
    if (out.machines.bins[v] == 0)
      out.low_degree_nodes.push_back(v);
    else
      out.bin_nodes[out.machines.bins[v]].push_back(v);
  }
  out.children.reserve(params.bin_count + 1);
  out.children.push_back(induced_subinstance(inst, out.low_degree_nodes));
  for (std::uint64_t b = 1; b <= params.bin_count; ++b) {
    InducedSubinstance child = induced_subinstance(inst, out.bin_nodes[b]);
    // A single color bin keeps every color; only real splits materialize.
    if (b < params.bin_count && params.color_bin_count >= 2) {
      PaletteRestriction link{h2, seed2, b, params.color_bin_count};
      child.instance.palettes = child.instance.palettes.restricted(link).materialized();
      child.instance.variant = PaletteVariant::GeneralList;
    }
    out.children.push_back(std::move(child));
  }
  return out;
}

// ---- MIS reduction -------------------------------------------------------

// The clique-per-node reduction: one clique node per (node, palette color)
// pair, a clique over each node's palette, and a conflict edge wherever two
// adjacent nodes share a color. Held implicitly; the adjacency is
// materialized only on demand (tiny instances, external solvers).
struct MisInstance {
  ListColoringInstance source;                 // palettes materialized
  std::vector<std::vector<ColorId>> palettes;  // per node, sorted
  std::vector<std::uint64_t> clique_offset;    // clique node id of (v, 0)
  std::uint64_t clique_node_count = 0;
  std::uint64_t clique_edges = 0;
  std::uint64_t conflict_edges = 0;
  std::uint64_t max_degree = 0;  // of the reduction graph

  std::pair<NodeId, ColorId> back_map(std::uint64_t clique_node) const {
    const auto it = std::upper_bound(clique_offset.begin(), clique_offset.end(), clique_node);
    const NodeId v = static_cast<NodeId>(it - clique_offset.begin() - 1);
    return {v, palettes[v][clique_node - clique_offset[v]]};
  }
};

inline MisInstance mis_reduction(const ListColoringInstance& inst) {
  MisInstance mi;
  mi.source = inst;
  const NodeId n = inst.node_count();
  mi.palettes.resize(n);
  mi.clique_offset.assign(n + 1, 0);
  for (NodeId v = 0; v < n; ++v) {
    mi.palettes[v] = inst.palettes.materialize(v);
    mi.clique_offset[v + 1] = mi.clique_offset[v] + mi.palettes[v].size();
    const std::uint64_t p = mi.palettes[v].size();
    mi.clique_edges += p * (p - 1) / 2;
  }
  mi.clique_node_count = mi.clique_offset[n];

  std::vector<std::uint64_t> conflict_degree(mi.clique_node_count, 0);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : inst.graph.neighbors(v)) {
      if (u < v) continue;
      const auto& pv = mi.palettes[v];
      const auto& pu = mi.palettes[u];
      std::size_t i = 0, j = 0;
      while (i < pv.size() && j < pu.size()) {
        if (pv[i] < pu[j]) {
          ++i;
        } else if (pv[i] > pu[j]) {
          ++j;
        } else {
          ++mi.conflict_edges;
          ++conflict_degree[mi.clique_offset[v] + i];
          ++conflict_degree[mi.clique_offset[u] + j];
          ++i;
          ++j;
        }
      }
    }
  }
  for (NodeId v = 0; v < n; ++v)
    for (std::size_t i = 0; i < mi.palettes[v].size(); ++i)
      mi.max_degree = std::max(mi.max_degree,
                               mi.palettes[v].size() - 1 + conflict_degree[mi.clique_offset[v] + i]);
  return mi;
}

// Explicit adjacency of the reduction graph; meant for small instances and
// the external-solver file contract.
inline Graph mis_reduction_graph(const MisInstance& mi) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  const NodeId n = mi.source.node_count();
  for (NodeId v = 0; v < n; ++v) {
    const std::uint64_t base = mi.clique_offset[v];
    const std::size_t p = mi.palettes[v].size();
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j)
        edges.emplace_back(static_cast<NodeId>(base + i), static_cast<NodeId>(base + j));
    for (NodeId u : mi.source.graph.neighbors(v)) {
      if (u < v) continue;
      const auto& pv = mi.palettes[v];
      const auto& pu = mi.palettes[u];
      std::size_t i = 0, j = 0;
      while (i < pv.size() && j < pu.size()) {
        if (pv[i] < pu[j])
          ++i;
        else if (pv[i] > pu[j])
          ++j;
        else
          edges.emplace_back(static_cast<NodeId>(base + i),
                             static_cast<NodeId>(mi.clique_offset[u] + j)),
              ++i, ++j;
      }
    }
  }
  return Graph::from_edges(static_cast<NodeId>(mi.clique_node_count), edges);
}

// Greedy maximal independent set in ascending (node, color) order, run on
// the implicit reduction: equivalent to first-fit coloring by node id.
inline std::vector<std::uint64_t> solve_mis_greedy(const MisInstance& mi,
                                                   std::uint64_t& rounds_out) {
  const NodeId n = mi.source.node_count();
  std::vector<std::uint64_t> chosen;
  std::vector<std::int64_t> picked(n, -1);  // palette index chosen per node
  for (NodeId v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < mi.palettes[v].size(); ++i) {
      const ColorId c = mi.palettes[v][i];
      bool blocked = false;
      for (NodeId u : mi.source.graph.neighbors(v)) {
        if (u >= v || picked[u] < 0) continue;
        if (mi.palettes[u][picked[u]] == c) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        picked[v] = static_cast<std::int64_t>(i);
        chosen.push_back(mi.clique_offset[v] + i);
        break;
      }
    }
  }
  rounds_out = 1;  // the built-in solver runs on collected data
  return chosen;
}

// Extracts the coloring encoded by a maximal independent set, diagnosing
// non-independent or non-maximal inputs with a witness.
inline ColoringAssignment coloring_from_mis(const MisInstance& mi,
                                            std::span<const std::uint64_t> set,
                                            ValidationReport* diagnosis = nullptr) {
  const NodeId n = mi.source.node_count();
  ColoringAssignment a(n);
  ValidationReport local;
  ValidationReport& report = diagnosis ? *diagnosis : local;
  for (std::uint64_t cn : set) {
    if (cn >= mi.clique_node_count) {
      report.add("mis-bad-id", std::to_string(cn));
      continue;
    }
    const auto [v, c] = mi.back_map(cn);
    if (a.assigned(v))
      report.add("mis-not-independent", "two clique nodes of node " + std::to_string(v));
    a.color[v] = static_cast<std::int64_t>(c);
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!a.assigned(v)) {
      // Maximality demands an uncovered clique node somewhere in v's clique.
      report.add("mis-not-maximal", "node " + std::to_string(v) + " has no chosen color");
      continue;
    }
    for (NodeId u : mi.source.graph.neighbors(v))
      if (u > v && a.assigned(u) && a.color[u] == a.color[v])
        report.add("mis-not-independent", "conflict edge " + std::to_string(v) + " -- " +
                                              std::to_string(u) + " both color " +
                                              std::to_string(a.color[v]));
  }
  a.complete = true;
  for (NodeId v = 0; v < n; ++v)
    if (!a.assigned(v)) a.complete = false;
  if (!diagnosis && !report.ok())
    throw std::invalid_argument("coloring_from_mis: invalid independent set:\n" +
                                report.to_string());
  return a;
}

using MisSolver =
    std::function<std::vector<std::uint64_t>(const MisInstance&, std::uint64_t& rounds)>;

inline MisSolver builtin_mis_solver() {
  return [](const MisInstance& mi, std::uint64_t& rounds) { return solve_mis_greedy(mi, rounds); };
}

// ---- recursion driver ----------------------------------------------------

struct LowSpaceConfig {
  int hash_independence = 8;
  int hash_domain_bits_node = 0;
  int hash_field_bits_node = 0;
  int hash_field_bits_color = 0;
  DerandConfig derand;
  int max_depth = 64;
  MisSolver mis_solver = builtin_mis_solver();
};

struct LsLevelRecord {
  int depth = 0;
  std::uint32_t nodes = 0;
  std::uint32_t max_degree = 0;
  std::uint32_t low_degree_nodes = 0;
  std::uint64_t machines = 0;
  std::uint64_t bad_machines = 0;
  bool zero_cost = false;
  bool guarantees_ok = false;  // Lemma-4.4 style aggregation passed (zero-cost levels)
  std::uint64_t deferred = 0;
  std::pair<std::string, std::string> seeds;
};

struct LsTrace {
  std::vector<LsLevelRecord> levels;  // one record per partition call
  int depth = 0;
  std::vector<std::string> flags;
  std::vector<DerandCertificate> certificates;
  std::uint64_t mis_calls = 0;
  std::uint64_t mis_clique_nodes = 0;
  std::uint64_t mis_conflict_edges = 0;
  std::uint64_t mis_size_bound_violations = 0;  // among calls with deg+1-sized palettes
  std::uint64_t deferred_total = 0;
  std::uint64_t lemma45_violations = 0;  // p' <= d' among surviving binned nodes
  std::uint64_t zero_cost_levels = 0;
  std::uint64_t total_levels = 0;
};

struct LsColorReduceResult {
  ColoringAssignment assignment;
  LsTrace trace;
  CostLedger ledger;
};

namespace detail {

struct LsContext {
  const LowSpaceConfig& config;
  const SimConfig& sim;
  LowSpaceParams params;
  std::uint64_t universe;
  LsTrace trace;
};

inline std::vector<std::vector<ColorId>> ls_used_colors(const ListColoringInstance& parent,
                                                        std::span<const NodeId> members,
                                                        std::span<const NodeId> parent_to_root,
                                                        const ColoringAssignment& root) {
  std::vector<std::vector<ColorId>> used(members.size());
  for (std::size_t i = 0; i < members.size(); ++i)
    for (NodeId u : parent.graph.neighbors(members[i])) {
      const NodeId ru = parent_to_root[u];
      if (root.color[ru] != kUncolored) used[i].push_back(static_cast<ColorId>(root.color[ru]));
    }
  return used;
}

inline void ls_mis_color(const ListColoringInstance& inst, std::span<const NodeId> to_root,
                         LsContext& ctx, ColoringAssignment& root, CostLedger& ledger) {
  if (inst.node_count() == 0) return;
  MisInstance mi = mis_reduction(inst);
  ++ctx.trace.mis_calls;
  ctx.trace.mis_clique_nodes += mi.clique_node_count;
  ctx.trace.mis_conflict_edges += mi.conflict_edges;
  // Reduction size bounds, checkable when palettes are deg+1 sized (at most
  // T+1 colors per node): at most n*(T+1) clique nodes, degree below (T+1)^2.
  std::uint64_t max_p = 0;
  for (NodeId v = 0; v < inst.node_count(); ++v)
    max_p = std::max(max_p, inst.palettes.size(v));
  const std::uint64_t t1 = ctx.params.degree_threshold + 1;
  if (max_p <= t1 &&
      (mi.clique_node_count > inst.node_count() * t1 || mi.max_degree > t1 * t1))
    ++ctx.trace.mis_size_bound_violations;
  std::uint64_t rounds = 0;
  const auto set = ctx.config.mis_solver(mi, rounds);
  ledger.charge_mis_rounds(rounds);
  ledger.charge(Phase::Mis, Primitive::Route, mi.clique_node_count + mi.conflict_edges,
                mi.max_degree + 2, ctx.sim.cost_table);
  ledger.observe_machine_words(Phase::Mis, mi.max_degree + 2);
  ValidationReport diag;
  const ColoringAssignment local = coloring_from_mis(mi, set, &diag);
  if (!diag.ok()) {
    ctx.trace.flags.push_back("mis-solver returned an invalid set");
    return;
  }
  for (NodeId v = 0; v < inst.node_count(); ++v) root.color[to_root[v]] = local.color[v];
}

inline void ls_greedy_color(const ListColoringInstance& inst, std::span<const NodeId> to_root,
                            LsContext& ctx, ColoringAssignment& root, CostLedger& ledger) {
  if (inst.node_count() == 0) return;
  const std::uint64_t words = inst.size_words();
  ledger.charge(Phase::Collect, Primitive::Route, words, words, ctx.sim.cost_table);
  ledger.observe_machine_words(Phase::Collect, words);
  const GreedyResult res = greedy_color(inst, identity_order(inst.node_count()));
  ledger.charge(Phase::Collect, Primitive::Broadcast, inst.node_count(), inst.node_count(),
                ctx.sim.cost_table);
  if (!res.ok) {
    ctx.trace.flags.push_back("deferred-greedy stuck at node " + std::to_string(res.stuck_node));
    return;
  }
  for (NodeId v = 0; v < inst.node_count(); ++v) root.color[to_root[v]] = res.assignment.color[v];
}

inline void ls_reduce_recursive(const ListColoringInstance& inst, int depth,
                                std::span<const NodeId> to_root, LsContext& ctx,
                                ColoringAssignment& root, CostLedger& ledger) {
  if (inst.node_count() == 0) return;
  ctx.trace.depth = std::max(ctx.trace.depth, depth);
  const LowSpaceParams& params = ctx.params;

  const bool all_low = inst.graph.max_degree() <= params.degree_threshold;
  if (all_low || depth >= ctx.config.max_depth) {
    if (!all_low) ctx.trace.flags.push_back("depth-cap mis fallback at depth " + std::to_string(depth));
    ls_mis_color(inst, to_root, ctx, root, ledger);
    return;
  }

  const auto groups = form_machine_groups(inst, params);
  const HashFamilyParams h1 =
      node_hash_params(params.n_root, ctx.config.hash_independence,
                       ctx.config.hash_field_bits_node, ctx.config.hash_domain_bits_node);
  const HashFamilyParams h2 = color_hash_params(ctx.universe, ctx.config.hash_independence,
                                                ctx.config.hash_field_bits_color);
  LowSpacePairCost cost(inst, groups, params, h1, h2);
  FixSeedResult sel;
  std::uint64_t iterations = 0;
  if (ctx.config.derand.strategy == DerandStrategy::ExactEnumeration) {
    ChunkSchedule sched{ctx.config.derand.chunk_bits, DerandStrategy::ExactEnumeration,
                        ctx.config.derand.enum_budget_bits};
    sel = fix_seed_exact(cost, sched);
    iterations = sel.certificate.steps.size();
  } else {
    const SeedPool pool = make_joint_pool(h1, h2, ctx.config.derand.pool_bits);
    sel = pool_search(cost, pool);
    const std::uint64_t per_round = std::uint64_t{1} << ctx.config.derand.chunk_bits;
    iterations = (pool.size() + per_round - 1) / per_round;
  }
  for (std::uint64_t i = 0; i < iterations; ++i)
    ledger.charge(Phase::Derandomize, Primitive::PrefixSum, groups.size(),
                  std::uint64_t{1} << ctx.config.derand.chunk_bits, ctx.sim.cost_table);
  ctx.trace.certificates.push_back(sel.certificate);

  const auto [s1, s2] = cost.split(sel.seed);
  LsPartitionOutcome outcome = ls_partition(inst, params, groups, h1, s1, h2, s2);
  ledger.charge(Phase::Partition, Primitive::Sort, inst.size_words(),
                2 * params.degree_threshold + 4, ctx.sim.cost_table);
  ledger.observe_machine_words(Phase::Partition, 2 * params.degree_threshold + 4);

  LsLevelRecord rec;
  rec.depth = depth;
  rec.nodes = inst.node_count();
  rec.max_degree = inst.graph.max_degree();
  rec.low_degree_nodes = static_cast<std::uint32_t>(outcome.low_degree_nodes.size());
  rec.machines = groups.size();
  rec.bad_machines = outcome.machines.bad_count();
  rec.zero_cost = rec.bad_machines == 0;
  rec.seeds = {s1.hex(), s2.hex()};
  ++ctx.trace.total_levels;
  if (rec.zero_cost) ++ctx.trace.zero_cost_levels;
  if (rec.zero_cost && !groups.empty()) {
    const NodeGuarantees ng = aggregate_node_guarantees(inst, groups, outcome.machines, params);
    rec.guarantees_ok = ng.report.ok();
    if (!ng.report.ok())
      ctx.trace.flags.push_back("aggregate guarantees failed at depth " + std::to_string(depth));
  } else {
    rec.guarantees_ok = rec.zero_cost;  // vacuous when no machines exist
  }

  const std::uint64_t k = params.bin_count;

  // Deferred nodes: binned nodes whose restricted palette fails p' > d'.
  // They are pulled out of their bin and colored at the very end, when their
  // original palette minus used neighbor colors is guaranteed to suffice.
  std::vector<NodeId> deferred_parent_ids;

  std::vector<CostLedger> parallel;
  std::vector<std::pair<ListColoringInstance, std::vector<NodeId>>> bin_children;
  for (std::uint64_t b = 1; b < k; ++b) {
    auto& child = outcome.children[b];
    if (child.instance.node_count() == 0) continue;
    std::vector<NodeId> defer_local;
    for (NodeId i = 0; i < child.instance.node_count(); ++i) {
      if (child.instance.palettes.size(i) <= child.instance.graph.degree(i)) {
        defer_local.push_back(i);
        ++ctx.trace.lemma45_violations;
      }
    }
    std::vector<NodeId> child_to_root(child.to_parent.size());
    for (std::size_t i = 0; i < child.to_parent.size(); ++i)
      child_to_root[i] = to_root[child.to_parent[i]];
    if (defer_local.empty()) {
      bin_children.emplace_back(std::move(child.instance), std::move(child_to_root));
    } else {
      for (NodeId i : defer_local) deferred_parent_ids.push_back(child.to_parent[i]);
      std::vector<NodeId> keep;
      for (NodeId i = 0; i < child.instance.node_count(); ++i)
        if (!std::binary_search(defer_local.begin(), defer_local.end(), i)) keep.push_back(i);
      auto kept = induced_subinstance(child.instance, keep);
      std::vector<NodeId> kept_to_root(kept.to_parent.size());
      for (std::size_t i = 0; i < kept.to_parent.size(); ++i)
        kept_to_root[i] = child_to_root[kept.to_parent[i]];
      bin_children.emplace_back(std::move(kept.instance), std::move(kept_to_root));
    }
  }
  for (auto& [child_inst, child_to_root] : bin_children) {
    CostLedger branch;
    ls_reduce_recursive(child_inst, depth + 1, child_to_root, ctx, root, branch);
    parallel.push_back(branch);
  }
  if (!parallel.empty()) ledger.append_sequential(CostLedger::merge_parallel(parallel));

  // Bin k: palette update against everything colored so far, then recurse.
  {
    auto& child = outcome.children[k];
    if (child.instance.node_count() > 0) {
      const auto used = ls_used_colors(inst, outcome.bin_nodes[k], to_root, root);
      std::uint64_t volume = 0;
      for (const auto& u : used) volume += u.size();
      ledger.charge(Phase::Partition, Primitive::Route, volume,
                    2 * params.degree_threshold + 4, ctx.sim.cost_table);
      ListColoringInstance updated = remove_used_colors(child.instance, used);
      for (NodeId i = 0; i < updated.node_count(); ++i)
        if (updated.palettes.size(i) <= updated.graph.degree(i)) ++ctx.trace.lemma45_violations;
      std::vector<NodeId> child_to_root(child.to_parent.size());
      for (std::size_t i = 0; i < child.to_parent.size(); ++i)
        child_to_root[i] = to_root[child.to_parent[i]];
      ls_reduce_recursive(updated, depth + 1, child_to_root, ctx, root, ledger);
    }
  }

  // G0 (low degree): palette update, then the MIS reduction.
  {
    auto& child = outcome.children[0];
    if (child.instance.node_count() > 0) {
      const auto used = ls_used_colors(inst, outcome.low_degree_nodes, to_root, root);
      std::uint64_t volume = 0;
      for (const auto& u : used) volume += u.size();
      ledger.charge(Phase::Partition, Primitive::Route, volume,
                    2 * params.degree_threshold + 4, ctx.sim.cost_table);
      ListColoringInstance updated = remove_used_colors(child.instance, used);
      std::vector<NodeId> child_to_root(child.to_parent.size());
      for (std::size_t i = 0; i < child.to_parent.size(); ++i)
        child_to_root[i] = to_root[child.to_parent[i]];
      ls_mis_color(updated, child_to_root, ctx, root, ledger);
    }
  }

  // Deferred stragglers, colored last from their updated original palettes.
  if (!deferred_parent_ids.empty()) {
    ctx.trace.deferred_total += deferred_parent_ids.size();
    rec.deferred = deferred_parent_ids.size();
    ctx.trace.flags.push_back("deferred " + std::to_string(deferred_parent_ids.size()) +
                              " nodes at depth " + std::to_string(depth));
    std::sort(deferred_parent_ids.begin(), deferred_parent_ids.end());
    auto def = induced_subinstance(inst, deferred_parent_ids);
    const auto used = ls_used_colors(inst, deferred_parent_ids, to_root, root);
    ListColoringInstance def_updated = remove_used_colors(def.instance, used);
    std::vector<NodeId> def_to_root(def.to_parent.size());
    for (std::size_t i = 0; i < def.to_parent.size(); ++i)
      def_to_root[i] = to_root[def.to_parent[i]];
    ls_greedy_color(def_updated, def_to_root, ctx, root, ledger);
  }

  ctx.trace.levels.push_back(rec);
}

}  // namespace detail

// The sublinear-regime recursion: split off low-degree nodes, bin the rest
// with a derandomized hash pair chosen by machine-level cost, recurse on the
// bins, and finish the low-degree residue through the MIS reduction.
inline LsColorReduceResult ls_color_reduce(const ListColoringInstance& inst,
                                           const LowSpaceParams& params,
                                           const LowSpaceConfig& config, const SimConfig& sim) {
  detail::LsContext ctx{config, sim, params, inst.color_universe, {}};
  LsColorReduceResult out;
  out.assignment = ColoringAssignment(inst.node_count());
  std::vector<NodeId> to_root(inst.node_count());
  for (NodeId v = 0; v < inst.node_count(); ++v) to_root[v] = v;

  detail::ls_reduce_recursive(inst, 0, to_root, ctx, out.assignment, out.ledger);

  out.assignment.complete = true;
  for (NodeId v = 0; v < inst.node_count(); ++v)
    if (!out.assignment.assigned(v)) out.assignment.complete = false;
  out.trace = std::move(ctx.trace);
  return out;
}

}  // namespace detcolor
