#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "detcolor/mpc_sim.hpp"
#include "detcolor/partition.hpp"

namespace detcolor {

struct ColorReduceConfig {
  double ell_min = 1024.0;     // refuse to partition below this ell
  int max_depth = 11;          // 9 plus slack; exceeding it is a failure
  double collect_factor = 1.0; // collect when size_words <= factor * S
  int hash_independence = 8;
  int hash_domain_bits_node = 0;  // 0 = derived from n; overrides only upward
  int hash_field_bits_node = 0;   // 0 = derived from n
  int hash_field_bits_color = 0;  // 0 = derived from the color universe
  DerandConfig derand;
  bool record_certificates = true;
};

struct TraceInstanceRecord {
  std::uint32_t nodes = 0;
  std::uint32_t max_degree = 0;
  std::uint64_t palette_min = 0;
  std::uint64_t bad_nodes = 0;
  std::uint64_t bad_bins = 0;
  std::uint64_t size_words = 0;
  bool collected = false;  // true when solved by collect-and-color at this level
};

struct TraceLevel {
  int depth = 0;
  double ell = 0;
  std::vector<TraceInstanceRecord> instances;
  std::vector<std::pair<std::string, std::string>> seeds;  // (h1, h2) hex per partition
};

struct RecursionTrace {
  std::vector<TraceLevel> levels;
  int depth = 0;  // deepest level that ran
  std::vector<std::string> flags;
  std::vector<DerandCertificate> certificates;
  std::uint64_t lemma_i_violations = 0;
  std::uint64_t lemma_ii_violations = 0;   // raw excursions at any ell
  std::uint64_t lemma_iii_violations = 0;
  std::uint64_t lemma_ii_applicable_violations = 0;  // at ell above the regime threshold
  std::uint64_t bin_k_update_violations = 0;
  std::uint64_t g0_bound_reported = 0;  // partitions whose bad count exceeded n/ell^2
};

struct ColorReduceResult {
  ColoringAssignment assignment;
  RecursionTrace trace;
  CostLedger ledger;
};

// Palette membership under the implicit representation (base minus
// exclusions, filtered through the restriction chain).
inline bool implicit_membership(const PaletteSet& palettes, NodeId v, ColorId c) {
  return palettes.contains(v, c);
}

// Smallest palette member not in `forbidden`, scanning the base in order and
// filtering through chain and exclusions. Returns false when exhausted,
// which signals an invariant violation upstream.
inline bool implicit_first_free(const PaletteSet& palettes, NodeId v,
                                std::span<const ColorId> forbidden_sorted, ColorId& out) {
  bool found = false;
  palettes.for_each(v, [&](ColorId c) {
    if (std::binary_search(forbidden_sorted.begin(), forbidden_sorted.end(), c)) return true;
    out = c;
    found = true;
    return false;
  });
  return found;
}

struct BinKUpdate {
  ListColoringInstance instance;        // bin-k child with palettes updated
  ValidationReport conclusions;         // post-update invariant checks for good nodes
  std::vector<std::uint64_t> palette_after;  // p'(v) per child node
  std::vector<NodeId> violating;             // child-local ids failing a conclusion
};

// Removes from each bin-k node's palette the colors taken by its already
// colored neighbors (parent-local assignment), then checks the surviving
// invariant conclusions for good nodes: ell' < p'(v) and d'(v) < p'(v).
inline BinKUpdate update_bin_k_palettes(const ListColoringInstance& parent,
                                        const PartitionOutcome& outcome,
                                        const ColoringAssignment& parent_colors) {
  const std::uint64_t k = outcome.params.bin_count;
  const auto& child = outcome.children[k];
  std::vector<std::vector<ColorId>> used(child.to_parent.size());
  for (std::size_t i = 0; i < child.to_parent.size(); ++i)
    for (NodeId u : parent.graph.neighbors(child.to_parent[i]))
      if (parent_colors.assigned(u)) used[i].push_back(static_cast<ColorId>(parent_colors.color[u]));

  BinKUpdate upd;
  upd.instance = remove_used_colors(child.instance, used);
  upd.palette_after.resize(child.to_parent.size());
  for (std::size_t i = 0; i < child.to_parent.size(); ++i) {
    const NodeId parent_id = child.to_parent[i];
    const auto& nc = outcome.report.nodes[parent_id];
    const std::uint64_t p_after = upd.instance.palettes.size(static_cast<NodeId>(i));
    upd.palette_after[i] = p_after;
    if (!nc.overall_good) continue;
    bool bad = false;
    if (!(outcome.params.ell_child < static_cast<double>(p_after))) {
      upd.conclusions.add("lemma-i", "bin-k node " + std::to_string(parent_id) + ": p'=" +
                                         std::to_string(p_after) + " <= ell'");
      bad = true;
    }
    if (!(nc.degree_in_bin < p_after)) {
      upd.conclusions.add("lemma-iii", "bin-k node " + std::to_string(parent_id) + ": d'=" +
                                           std::to_string(nc.degree_in_bin) +
                                           " >= p'=" + std::to_string(p_after));
      bad = true;
    }
    if (bad) upd.violating.push_back(static_cast<NodeId>(i));
  }
  return upd;
}

namespace detail {

struct ReduceContext {
  const ColorReduceConfig& config;
  const SimConfig& sim;
  std::uint32_t n_root;
  std::uint64_t universe;
  RecursionTrace trace;
  std::vector<std::uint64_t> level_words;  // per-depth live footprint
  double lemma_ii_ell;

  TraceLevel& level(int depth, double ell) {
    while (trace.levels.size() <= static_cast<std::size_t>(depth))
      trace.levels.push_back({static_cast<int>(trace.levels.size()), 0.0, {}, {}});
    auto& lv = trace.levels[depth];
    if (lv.ell == 0.0)
      lv.ell = ell;
    else if (lv.ell != ell)
      trace.flags.push_back("mixed-ell at depth " + std::to_string(depth));
    if (level_words.size() <= static_cast<std::size_t>(depth)) level_words.resize(depth + 1, 0);
    trace.depth = std::max(trace.depth, depth);
    return lv;
  }
};

// Colors used by already-colored neighbors of each node of `child`, looking
// through the translation onto the root assignment.
inline std::vector<std::vector<ColorId>> used_neighbor_colors(
    const ListColoringInstance& parent, std::span<const NodeId> child_nodes,
    std::span<const NodeId> parent_to_root, const ColoringAssignment& root) {
  std::vector<std::vector<ColorId>> used(child_nodes.size());
  for (std::size_t i = 0; i < child_nodes.size(); ++i) {
    for (NodeId u : parent.graph.neighbors(child_nodes[i])) {
      const NodeId ru = parent_to_root[u];
      if (root.color[ru] != kUncolored) used[i].push_back(static_cast<ColorId>(root.color[ru]));
    }
  }
  return used;
}

// Collect-and-color: route the instance to one machine, first-fit in
// ascending node order, broadcast the colors. For delta-plus-one instances
// the palette is truncated to deg+1 smallest members first, which is what
// keeps the collected footprint linear in the edge count.
inline void collect_and_color(const ListColoringInstance& inst, std::span<const NodeId> to_root,
                              int depth, double ell, ReduceContext& ctx,
                              ColoringAssignment& root, CostLedger& ledger) {
  ListColoringInstance local = inst;
  if (inst.variant == PaletteVariant::DeltaPlusOne) {
    std::vector<std::uint64_t> keep(inst.node_count());
    for (NodeId v = 0; v < inst.node_count(); ++v) keep[v] = inst.graph.degree(v) + 1ull;
    local.palettes = inst.palettes.truncated(keep);
    local.variant = PaletteVariant::GeneralList;
  }

  const std::uint64_t words = local.size_words();
  ledger.charge(Phase::Collect, Primitive::Route, words, words, ctx.sim.cost_table);
  ledger.observe_machine_words(Phase::Collect, words);
  const GreedyResult res = greedy_color(local, identity_order(local.node_count()));
  ledger.charge(Phase::Collect, Primitive::Broadcast, local.node_count(), local.node_count(),
                ctx.sim.cost_table);
  if (!res.ok) {
    ctx.trace.flags.push_back("greedy-stuck at depth " + std::to_string(depth) + " node " +
                              std::to_string(res.stuck_node));
    return;
  }
  for (NodeId v = 0; v < local.node_count(); ++v) root.color[to_root[v]] = res.assignment.color[v];

  auto& lv = ctx.level(depth, ell);
  TraceInstanceRecord rec;
  rec.nodes = inst.node_count();
  rec.max_degree = inst.graph.max_degree();
  rec.palette_min = inst.node_count() ? inst.palettes.size(0) : 0;
  for (NodeId v = 0; v < inst.node_count(); ++v)
    rec.palette_min = std::min(rec.palette_min, inst.palettes.size(v));
  rec.size_words = words;
  rec.collected = true;
  lv.instances.push_back(rec);
  ctx.level_words[depth] += words;
}

inline void reduce_recursive(const ListColoringInstance& inst, double ell, int depth,
                             std::span<const NodeId> to_root, ReduceContext& ctx,
                             ColoringAssignment& root, CostLedger& ledger) {
  if (depth > ctx.config.max_depth)
    throw std::runtime_error("color_reduce: recursion depth exceeded configured maximum");
  if (inst.node_count() == 0) return;

  const PartitionParams params = derive_params(ell, inst.node_count(), ctx.n_root);
  const std::uint64_t collect_limit = static_cast<std::uint64_t>(
      ctx.config.collect_factor * static_cast<double>(ctx.sim.local_space_words));
  const bool fits = inst.size_words() <= collect_limit;
  const bool degenerate = params.degenerate_bins || ell < ctx.config.ell_min;

  if (fits || degenerate) {
    if (!fits)
      ctx.trace.flags.push_back("degenerate-collect at depth " + std::to_string(depth) +
                                " (instance exceeds collect threshold)");
    collect_and_color(inst, to_root, depth, ell, ctx, root, ledger);
    return;
  }

  // Derandomized seed selection for the (h1, h2) pair.
  const HashFamilyParams h1 =
      node_hash_params(ctx.n_root, ctx.config.hash_independence,
                       ctx.config.hash_field_bits_node, ctx.config.hash_domain_bits_node);
  const HashFamilyParams h2 = color_hash_params(ctx.universe, ctx.config.hash_independence,
                                                ctx.config.hash_field_bits_color);
  const SeedSelection sel = select_partition_seeds(inst, params, h1, h2, ctx.config.derand);
  for (std::uint64_t i = 0; i < sel.iterations; ++i)
    ledger.charge(Phase::Derandomize, Primitive::PrefixSum, inst.node_count(),
                  std::uint64_t{1} << ctx.config.derand.chunk_bits, ctx.sim.cost_table);
  if (ctx.config.record_certificates) ctx.trace.certificates.push_back(sel.certificate);

  PartitionOutcome outcome = partition(inst, params, h1, sel.seed1, h2, sel.seed2);
  ledger.charge(Phase::Partition, Primitive::Sort, inst.size_words(),
                inst.graph.max_degree() + 8, ctx.sim.cost_table);
  std::uint64_t node_footprint = 0;
  for (NodeId v = 0; v < inst.node_count(); ++v)
    node_footprint = std::max<std::uint64_t>(node_footprint, inst.graph.degree(v) + 4);
  ledger.observe_machine_words(Phase::Partition, node_footprint);

  // Invariant bookkeeping (realized conclusions for good nodes).
  const ValidationReport inv = check_invariant(outcome, params);
  ctx.trace.lemma_i_violations += inv.count("lemma-i");
  ctx.trace.lemma_ii_violations += inv.count("lemma-ii");
  ctx.trace.lemma_iii_violations += inv.count("lemma-iii");
  if (ell >= ctx.lemma_ii_ell) ctx.trace.lemma_ii_applicable_violations += inv.count("lemma-ii");

  auto& lv = ctx.level(depth, ell);
  TraceInstanceRecord rec;
  rec.nodes = inst.node_count();
  rec.max_degree = inst.graph.max_degree();
  rec.palette_min = inst.palettes.size(0);
  for (NodeId v = 0; v < inst.node_count(); ++v)
    rec.palette_min = std::min(rec.palette_min, inst.palettes.size(v));
  rec.bad_nodes = outcome.report.bad_node_count();
  rec.bad_bins = outcome.report.bad_bin_count();
  rec.size_words = inst.size_words();
  lv.instances.push_back(rec);
  lv.seeds.emplace_back(sel.seed1.hex(), sel.seed2.hex());
  ctx.level_words[depth] += inst.size_words();

  const double g0_bound = static_cast<double>(ctx.n_root) / (ell * ell);
  if (static_cast<double>(rec.bad_nodes) > g0_bound) ++ctx.trace.g0_bound_reported;

  const std::uint64_t k = params.bin_count;

  // Bins 1..k-1 recurse in parallel on disjoint nodes and disjoint colors.
  std::vector<CostLedger> parallel;
  for (std::uint64_t b = 1; b < k; ++b) {
    const auto& child = outcome.children[b];
    if (child.instance.node_count() == 0) continue;
    std::vector<NodeId> child_to_root(child.to_parent.size());
    for (std::size_t i = 0; i < child.to_parent.size(); ++i)
      child_to_root[i] = to_root[child.to_parent[i]];
    CostLedger branch;
    reduce_recursive(child.instance, params.ell_child, depth + 1, child_to_root, ctx, root, branch);
    parallel.push_back(branch);
  }
  if (!parallel.empty()) ledger.append_sequential(CostLedger::merge_parallel(parallel));

  // Bin k: update palettes against everything colored so far, re-check the
  // invariant's palette conclusions, then recurse.
  {
    const auto& child = outcome.children[k];
    if (child.instance.node_count() > 0) {
      ColoringAssignment parent_colors(inst.node_count());
      for (NodeId v = 0; v < inst.node_count(); ++v) parent_colors.color[v] = root.color[to_root[v]];
      BinKUpdate upd = update_bin_k_palettes(inst, outcome, parent_colors);
      std::uint64_t volume = 0;
      for (const auto& ex : child.to_parent) volume += inst.graph.degree(ex);
      ledger.charge(Phase::Partition, Primitive::Route, volume, node_footprint,
                    ctx.sim.cost_table);
      ctx.trace.bin_k_update_violations += upd.violating.size();
      if (!upd.violating.empty())
        ctx.trace.flags.push_back("bin-k nodes rerouted to the residual path at depth " +
                                  std::to_string(depth));

      std::vector<NodeId> child_to_root(child.to_parent.size());
      for (std::size_t i = 0; i < child.to_parent.size(); ++i)
        child_to_root[i] = to_root[child.to_parent[i]];
      if (upd.violating.empty()) {
        reduce_recursive(upd.instance, params.ell_child, depth + 1, child_to_root, ctx, root,
                         ledger);
      } else {
        // Split off the violating nodes; they are handled like G0, last.
        std::vector<NodeId> keep;
        for (NodeId i = 0; i < child.instance.node_count(); ++i)
          if (!std::binary_search(upd.violating.begin(), upd.violating.end(), i))
            keep.push_back(i);
        auto kept = induced_subinstance(upd.instance, keep);
        std::vector<NodeId> kept_to_root(kept.to_parent.size());
        for (std::size_t i = 0; i < kept.to_parent.size(); ++i)
          kept_to_root[i] = child_to_root[kept.to_parent[i]];
        reduce_recursive(kept.instance, params.ell_child, depth + 1, kept_to_root, ctx, root,
                         ledger);
        auto deferred = induced_subinstance(upd.instance, upd.violating);
        std::vector<NodeId> def_parent_ids(upd.violating.size());
        for (std::size_t i = 0; i < upd.violating.size(); ++i)
          def_parent_ids[i] = child.to_parent[upd.violating[i]];
        std::vector<NodeId> def_to_root(deferred.to_parent.size());
        for (std::size_t i = 0; i < deferred.to_parent.size(); ++i)
          def_to_root[i] = child_to_root[deferred.to_parent[i]];
        const auto def_used = used_neighbor_colors(inst, def_parent_ids, to_root, root);
        ListColoringInstance def_updated = remove_used_colors(deferred.instance, def_used);
        collect_and_color(def_updated, def_to_root, depth + 1, params.ell_child, ctx, root,
                          ledger);
      }
    }
  }

  // G0 last: update palettes, collect if it fits, otherwise recurse on it.
  {
    const auto& child = outcome.children[0];
    if (child.instance.node_count() > 0) {
      const auto used = used_neighbor_colors(inst, outcome.bad_nodes, to_root, root);
      std::uint64_t volume = 0;
      for (const auto& u : used) volume += u.size();
      ledger.charge(Phase::Partition, Primitive::Route, volume, node_footprint,
                    ctx.sim.cost_table);
      ListColoringInstance updated = remove_used_colors(child.instance, used);
      std::vector<NodeId> child_to_root(child.to_parent.size());
      for (std::size_t i = 0; i < child.to_parent.size(); ++i)
        child_to_root[i] = to_root[child.to_parent[i]];
      if (updated.size_words() <= collect_limit) {
        collect_and_color(updated, child_to_root, depth + 1, params.ell_child, ctx, root, ledger);
      } else {
        ctx.trace.flags.push_back("g0-recursed at depth " + std::to_string(depth) +
                                  " (exceeds collect threshold)");
        reduce_recursive(updated, static_cast<double>(updated.graph.max_degree()), depth + 1,
                         child_to_root, ctx, root, ledger);
      }
    }
  }
}

}  // namespace detail

// The full recursion: derandomized partition, parallel recursion on bins
// 1..k-1, sequential handling of bin k and G0, collect-and-color at the
// leaves. Returns a complete root-indexed assignment plus the trace and the
// simulated cost ledger.
inline ColorReduceResult color_reduce(const ListColoringInstance& inst, double ell,
                                      const ColorReduceConfig& config, const SimConfig& sim) {
  detail::ReduceContext ctx{config, sim, inst.node_count(), inst.color_universe,
                            {},     {},  lemma_ii_applicable_ell()};
  ColorReduceResult out;
  out.assignment = ColoringAssignment(inst.node_count());
  std::vector<NodeId> to_root(inst.node_count());
  for (NodeId v = 0; v < inst.node_count(); ++v) to_root[v] = v;

  detail::reduce_recursive(inst, ell, 0, to_root, ctx, out.assignment, out.ledger);

  out.assignment.complete = true;
  for (NodeId v = 0; v < inst.node_count(); ++v)
    if (!out.assignment.assigned(v)) out.assignment.complete = false;

  for (std::uint64_t words : ctx.level_words) out.ledger.observe_global_words(words);
  out.trace = std::move(ctx.trace);
  return out;
}

// Closed-form recursion bounds, checked against the realized trace:
//   ell_i in (Delta^{0.9^i}/2, Delta^{0.9^i}]
//   n_i  <= 3^i (n Delta^{0.9^i - 1} + n^0.6)
//   Delta_i <= 2^i Delta^{0.9^i}
//   n_i * Delta_i <= 6^i (n Delta^{0.9^i - 1} + n^0.6) Delta^{0.9^i}
// plus the depth bound of nine for runs that never hit a degenerate fallback.
inline ValidationReport assert_recursion_bounds(const RecursionTrace& trace, double delta_root,
                                                std::uint32_t n_root) {
  ValidationReport report;
  const double n = static_cast<double>(n_root);
  const double delta = delta_root;
  for (const auto& lv : trace.levels) {
    const double e = std::pow(0.9, lv.depth);
    const double dpow = std::pow(delta, e);
    const double pow3 = std::pow(3.0, lv.depth);
    const double pow2 = std::pow(2.0, lv.depth);
    const double n_bound = pow3 * (n * std::pow(delta, e - 1.0) + std::pow(n, 0.6));
    const double d_bound = pow2 * dpow;
    bool mixed = false;
    for (const auto& f : trace.flags)
      if (f == "mixed-ell at depth " + std::to_string(lv.depth)) mixed = true;
    if (!mixed && !(lv.ell > 0.5 * dpow && lv.ell <= dpow))
      report.add("ell-bound", "depth " + std::to_string(lv.depth) + ": ell=" +
                                  std::to_string(lv.ell) + " outside (" +
                                  std::to_string(0.5 * dpow) + ", " + std::to_string(dpow) + "]");
    for (const auto& rec : lv.instances) {
      if (static_cast<double>(rec.nodes) > n_bound)
        report.add("n-bound", "depth " + std::to_string(lv.depth) + ": n_i=" +
                                  std::to_string(rec.nodes) + " > " + std::to_string(n_bound));
      if (static_cast<double>(rec.max_degree) > d_bound)
        report.add("delta-bound", "depth " + std::to_string(lv.depth) + ": Delta_i=" +
                                      std::to_string(rec.max_degree) + " > " +
                                      std::to_string(d_bound));
      if (static_cast<double>(rec.nodes) * static_cast<double>(rec.max_degree) >
          pow3 * pow2 * (n * std::pow(delta, e - 1.0) + std::pow(n, 0.6)) * dpow)
        report.add("size-bound", "depth " + std::to_string(lv.depth) + ": size exceeds the 6^i bound");
    }
  }
  bool degenerate_fallback = false;
  for (const auto& f : trace.flags)
    if (f.rfind("degenerate-collect", 0) == 0 || f.rfind("g0-recursed", 0) == 0)
      degenerate_fallback = true;
  if (!degenerate_fallback && trace.depth > 9)
    report.add("depth-bound", "recursion depth " + std::to_string(trace.depth) + " > 9");
  return report;
}

}  // namespace detcolor
