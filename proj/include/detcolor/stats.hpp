#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "detcolor/color_reduce.hpp"
#include "detcolor/low_space.hpp"
#include "detcolor/mpc_sim.hpp"

namespace detcolor {

using ojson = nlohmann::ordered_json;

// The stats records are the single source of truth for acceptance checks;
// human-readable summaries derive from them. Key order is fixed so identical
// runs serialize byte-identically.
inline ojson ledger_json(const CostLedger& ledger) {
  ojson by_phase;
  by_phase["partition"] = ledger.rounds_in(Phase::Partition);
  by_phase["derandomize"] = ledger.rounds_in(Phase::Derandomize);
  by_phase["collect"] = ledger.rounds_in(Phase::Collect);
  by_phase["mis"] = ledger.rounds_in(Phase::Mis);
  ojson j;
  j["rounds"] = ledger.rounds();
  j["rounds_by_phase"] = std::move(by_phase);
  j["total_messages"] = ledger.total_messages();
  j["max_machine_words"] = ledger.max_machine_words();
  j["global_words"] = ledger.global_high_water();
  j["mis_rounds_parametric"] = ledger.mis_parametric_rounds();
  return j;
}

inline ojson certificate_json(const DerandCertificate& cert) {
  ojson j;
  j["strategy"] = to_string(cert.strategy);
  j["final_cost"] = cert.final_cost;
  if (cert.strategy == DerandStrategy::ExactEnumeration) {
    j["expectation_sum"] = cert.initial_expectation.sum;
    j["expectation_completions_log2"] = cert.initial_expectation.completions_log2;
    j["chain_length"] = cert.steps.size();
    j["chain_non_increasing"] = cert.chain_non_increasing();
  } else {
    j["pool_size"] = cert.pool_size;
    j["pool_cost_sum"] = cert.pool_cost_sum;
  }
  j["final_leq_mean"] = cert.final_leq_mean();
  return j;
}

// Per-partition classification summary: realized per-bin sizes and flags,
// plus node-level counts (per-node detail is large and stays in memory).
inline ojson good_bad_report_json(const GoodBadReport& report) {
  ojson bins = ojson::array();
  for (std::size_t b = 1; b < report.bins.size(); ++b) {
    ojson entry;
    entry["bin"] = b;
    entry["size"] = report.bins[b].size;
    entry["good"] = report.bins[b].good;
    entry["within_strong_cap"] = report.bins[b].within_strong_cap;
    bins.push_back(std::move(entry));
  }
  std::uint64_t degree_bad = 0, palette_bad = 0, pending = 0;
  for (const auto& nc : report.nodes) {
    degree_bad += !nc.degree_good;
    palette_bad += !nc.palette_good;
    pending += nc.palette_pending;
  }
  ojson j;
  j["nodes"] = report.nodes.size();
  j["bad_nodes"] = report.bad_node_count();
  j["degree_bad"] = degree_bad;
  j["palette_bad"] = palette_bad;
  j["palette_pending"] = pending;
  j["bad_bins"] = report.bad_bin_count();
  j["bins_over_strong_cap"] = report.bins_over_strong_cap();
  j["bins"] = std::move(bins);
  return j;
}

inline ojson trace_json(const RecursionTrace& trace) {
  ojson levels = ojson::array();
  for (const auto& lv : trace.levels) {
    ojson instances = ojson::array();
    for (const auto& rec : lv.instances) {
      ojson r;
      r["n"] = rec.nodes;
      r["delta"] = rec.max_degree;
      r["bad_nodes"] = rec.bad_nodes;
      r["bad_bins"] = rec.bad_bins;
      r["size_words"] = rec.size_words;
      r["collected"] = rec.collected;
      instances.push_back(std::move(r));
    }
    ojson seeds = ojson::array();
    for (const auto& [s1, s2] : lv.seeds) seeds.push_back(ojson::array({s1, s2}));
    ojson l;
    l["depth"] = lv.depth;
    l["ell"] = lv.ell;
    l["instances"] = std::move(instances);
    l["seeds"] = std::move(seeds);
    levels.push_back(std::move(l));
  }
  ojson certs = ojson::array();
  for (const auto& cert : trace.certificates) certs.push_back(certificate_json(cert));
  ojson j;
  j["levels"] = std::move(levels);
  j["depth"] = trace.depth;
  j["flags"] = trace.flags;
  j["certificates"] = std::move(certs);
  j["lemma_i_violations"] = trace.lemma_i_violations;
  j["lemma_ii_raw_excursions"] = trace.lemma_ii_violations;
  j["lemma_ii_applicable_violations"] = trace.lemma_ii_applicable_violations;
  j["lemma_iii_violations"] = trace.lemma_iii_violations;
  j["bin_k_update_violations"] = trace.bin_k_update_violations;
  j["g0_bound_exceedances"] = trace.g0_bound_reported;
  return j;
}

inline ojson ls_trace_json(const LsTrace& trace) {
  ojson levels = ojson::array();
  for (const auto& lv : trace.levels) {
    ojson l;
    l["depth"] = lv.depth;
    l["n"] = lv.nodes;
    l["delta"] = lv.max_degree;
    l["low_degree_nodes"] = lv.low_degree_nodes;
    l["machines"] = lv.machines;
    l["bad_machines"] = lv.bad_machines;
    l["zero_cost"] = lv.zero_cost;
    l["guarantees_ok"] = lv.guarantees_ok;
    l["deferred"] = lv.deferred;
    l["seeds"] = ojson::array({lv.seeds.first, lv.seeds.second});
    levels.push_back(std::move(l));
  }
  ojson certs = ojson::array();
  for (const auto& cert : trace.certificates) certs.push_back(certificate_json(cert));
  ojson j;
  j["levels"] = std::move(levels);
  j["depth"] = trace.depth;
  j["flags"] = trace.flags;
  j["certificates"] = std::move(certs);
  j["mis_calls"] = trace.mis_calls;
  j["mis_clique_nodes"] = trace.mis_clique_nodes;
  j["mis_conflict_edges"] = trace.mis_conflict_edges;
  j["mis_size_bound_violations"] = trace.mis_size_bound_violations;
  j["deferred_total"] = trace.deferred_total;
  j["lemma45_violations"] = trace.lemma45_violations;
  j["zero_cost_levels"] = trace.zero_cost_levels;
  j["total_levels"] = trace.total_levels;
  return j;
}

// Top-level run record shared by both engines.
inline ojson run_stats_json(SimMode mode, const ListColoringInstance& inst,
                            const CostLedger& ledger, const ojson& trace,
                            const std::vector<std::uint64_t>& bad_counts, int recursion_depth,
                            bool valid) {
  ojson j;
  j["mode"] = to_string(mode);
  j["n"] = inst.node_count();
  j["m"] = inst.graph.edge_count();
  j["delta"] = inst.graph.max_degree();
  j["variant"] = to_string(inst.variant);
  const ojson lj = ledger_json(ledger);
  j["rounds"] = lj["rounds"];
  j["rounds_by_phase"] = lj["rounds_by_phase"];
  j["recursion_depth"] = recursion_depth;
  j["bad_node_counts"] = bad_counts;
  j["max_machine_words"] = lj["max_machine_words"];
  j["global_words"] = lj["global_words"];
  j["total_messages"] = lj["total_messages"];
  j["mis_rounds_parametric"] = lj["mis_rounds_parametric"];
  j["valid"] = valid;
  j["trace"] = trace;
  return j;
}

// Flattens a stats record to dotted key/value pairs for CSV emission;
// arrays of scalars join with ';', nested arrays are skipped.
inline void csv_flatten(const ojson& j, const std::string& prefix,
                        std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      csv_flatten(value, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_array()) {
    bool scalars = true;
    for (const auto& v : j)
      if (v.is_object() || v.is_array()) scalars = false;
    if (!scalars) return;
    std::string joined;
    for (const auto& v : j) {
      if (!joined.empty()) joined += ';';
      joined += v.is_string() ? v.get<std::string>() : v.dump();
    }
    out.emplace_back(prefix, joined);
  } else {
    out.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

inline std::string csv_row(const ojson& j, bool with_header) {
  std::vector<std::pair<std::string, std::string>> cells;
  csv_flatten(j, "", cells);
  std::string out;
  if (with_header) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out += cells[i].first + (i + 1 < cells.size() ? "," : "\n");
  }
  for (std::size_t i = 0; i < cells.size(); ++i)
    out += "\"" + cells[i].second + "\"" + (i + 1 < cells.size() ? "," : "\n");
  return out;
}

}  // namespace detcolor
