// detcolor: deterministic (Delta+1)- and (deg+1)-list coloring through
// derandomized palette partitioning, run inside a machine-model cost
// simulator. Subcommands: gen, color, lowspace, validate, bench, census.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "detcolor/color_reduce.hpp"
#include "detcolor/generate.hpp"
#include "detcolor/io.hpp"
#include "detcolor/low_space.hpp"
#include "detcolor/stats.hpp"

using namespace detcolor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct CommonFlags {
  std::string graph_path, palette_path;
  std::string mode = "linear-mpc";
  std::uint64_t space_factor = 64;
  double collect_factor = 1.0;
  int hash_a = 0, hash_b = 0, hash_c = 8;
  std::string derand_strategy = "pool";
  int chunk_bits = 8;
  int enum_budget_bits = 24;
  int pool_bits = 16;
  double ell_min = 1024.0;
  std::string cost_table_path;
  std::string emit = "json";
  std::string out_path;
  std::string stats_path;
};

void add_engine_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--graph", flags.graph_path, "graph file")->required();
  cmd->add_option("--palette", flags.palette_path,
                  "palette file (defaults to [0, Delta+1) ranges)");
  cmd->add_option("--mode", flags.mode, "machine model: congc | linear-mpc | low-space-mpc");
  cmd->add_option("--space-factor", flags.space_factor, "S = factor * n in linear modes");
  cmd->add_option("--collect-factor", flags.collect_factor, "collect when size <= factor * S");
  cmd->add_option("--hash-a", flags.hash_a, "node-hash domain bits override");
  cmd->add_option("--hash-b", flags.hash_b, "hash field bits override");
  cmd->add_option("--hash-c", flags.hash_c, "hash family independence");
  cmd->add_option("--derand-strategy", flags.derand_strategy, "exact | pool");
  cmd->add_option("--chunk-bits", flags.chunk_bits, "bits fixed per conditional-expectation step");
  cmd->add_option("--enum-budget-bits", flags.enum_budget_bits, "exact enumeration budget");
  cmd->add_option("--pool-bits", flags.pool_bits, "log2 of the pool size");
  cmd->add_option("--ell-min", flags.ell_min, "refuse to partition below this ell");
  cmd->add_option("--cost-table", flags.cost_table_path, "JSON file overriding primitive costs");
  cmd->add_option("--emit", flags.emit, "stats format: json | csv");
  cmd->add_option("--out", flags.out_path, "assignment output file");
  cmd->add_option("--stats", flags.stats_path, "stats output file (default stdout)");
}

ListColoringInstance load_instance(const CommonFlags& flags) {
  std::ifstream gin(flags.graph_path);
  if (!gin) throw std::runtime_error("cannot open " + flags.graph_path);
  Graph g = io::read_graph(gin, flags.graph_path);
  ListColoringInstance inst;
  const NodeId n = g.node_count();
  inst.color_universe = static_cast<std::uint64_t>(n) * n;
  if (flags.palette_path.empty()) {
    inst.palettes = PaletteSet::uniform_range(n, g.max_degree() + 1);
    inst.variant = PaletteVariant::DeltaPlusOne;
  } else {
    std::ifstream pin(flags.palette_path);
    if (!pin) throw std::runtime_error("cannot open " + flags.palette_path);
    inst.palettes = io::read_palettes(pin, flags.palette_path);
    if (inst.palettes.node_count() != n)
      throw std::runtime_error("palette file does not match the graph's node count");
    inst.variant = PaletteVariant::GeneralList;
    ColorId top = 0;
    for (NodeId v = 0; v < n; ++v)
      inst.palettes.for_each(v, [&](ColorId c) {
        top = std::max(top, c);
        return true;
      });
    if (top >= inst.color_universe) inst.color_universe = top + 1;
  }
  inst.graph = std::move(g);
  return inst;
}

CostTable load_cost_table(const std::string& path) {
  CostTable table;
  if (path.empty()) return table;
  const auto text = io::read_file(path);
  const auto j = nlohmann::json::parse(text);
  const std::pair<const char*, Primitive> names[] = {
      {"sort", Primitive::Sort},           {"prefix_sum", Primitive::PrefixSum},
      {"broadcast", Primitive::Broadcast}, {"route", Primitive::Route},
      {"local_step", Primitive::LocalStep}, {"barrier", Primitive::Barrier}};
  for (const auto& [name, prim] : names)
    if (j.contains(name)) table.set(prim, j[name].get<std::uint64_t>());
  return table;
}

DerandConfig derand_from_flags(const CommonFlags& flags) {
  DerandConfig d;
  if (flags.derand_strategy == "exact")
    d.strategy = DerandStrategy::ExactEnumeration;
  else if (flags.derand_strategy == "pool")
    d.strategy = DerandStrategy::PoolSearch;
  else
    throw std::invalid_argument("--derand-strategy must be 'exact' or 'pool'");
  d.chunk_bits = flags.chunk_bits;
  d.enum_budget_bits = flags.enum_budget_bits;
  d.pool_bits = flags.pool_bits;
  return d;
}

void emit_stats(const CommonFlags& flags, const ojson& stats) {
  std::string text;
  if (flags.emit == "csv")
    text = csv_row(stats, true);
  else
    text = stats.dump(2) + "\n";
  if (flags.stats_path.empty())
    std::cout << text;
  else
    io::write_file(flags.stats_path, text);
}

void write_assignment_file(const std::string& path, const ColoringAssignment& a) {
  if (path.empty()) return;
  std::ostringstream out;
  io::write_assignment(out, a);
  io::write_file(path, out.str());
}

// External solver contract: the reduction graph arrives on stdin in the
// graph text format; the solver prints one line of set member ids and one
// line "rounds <r>".
MisSolver external_mis_solver(const std::string& command) {
  return [command](const MisInstance& mi, std::uint64_t& rounds) {
    const std::string in_path = "/tmp/detcolor_mis_in.txt";
    const std::string out_path = "/tmp/detcolor_mis_out.txt";
    std::ostringstream graph_text;
    io::write_graph(graph_text, mis_reduction_graph(mi));
    io::write_file(in_path, graph_text.str());
    const std::string cmd = command + " < " + in_path + " > " + out_path;
    if (std::system(cmd.c_str()) != 0)
      throw std::runtime_error("mis solver failed: " + command);
    std::istringstream out(io::read_file(out_path));
    std::string set_line, rounds_line;
    std::getline(out, set_line);
    std::getline(out, rounds_line);
    std::vector<std::uint64_t> set;
    std::istringstream ss(set_line);
    std::uint64_t id;
    while (ss >> id) set.push_back(id);
    std::istringstream rs(rounds_line);
    std::string tag;
    rounds = 0;
    if (!(rs >> tag >> rounds) || tag != "rounds")
      throw std::runtime_error("mis solver output missing 'rounds <r>' line");
    return set;
  };
}

int run_color(const CommonFlags& flags) {
  const auto inst = load_instance(flags);
  const auto instance_report = validate_instance(inst);
  if (!instance_report.ok()) {
    std::cerr << instance_report.to_string();
    return kExitValidation;
  }

  SimConfig sim;
  if (flags.mode == "congc")
    sim = SimConfig::congested_clique(inst.node_count(), flags.space_factor);
  else if (flags.mode == "linear-mpc")
    sim = SimConfig::linear_mpc(inst.node_count(), flags.space_factor, inst.size_words());
  else
    throw std::invalid_argument("color supports --mode congc or linear-mpc");
  sim.cost_table = load_cost_table(flags.cost_table_path);

  ColorReduceConfig config;
  config.ell_min = flags.ell_min;
  config.collect_factor = flags.collect_factor;
  config.hash_independence = flags.hash_c;
  config.hash_domain_bits_node = flags.hash_a;
  config.hash_field_bits_node = flags.hash_b;
  config.hash_field_bits_color = flags.hash_b ? 2 * flags.hash_b : 0;
  config.derand = derand_from_flags(flags);

  const auto res = color_reduce(inst, inst.graph.max_degree(), config, sim);
  const auto coloring_report = validate_coloring(inst, res.assignment);
  const bool valid = res.assignment.complete && coloring_report.ok();

  std::vector<std::uint64_t> bad_counts;
  for (const auto& lv : res.trace.levels) {
    std::uint64_t bad = 0;
    for (const auto& rec : lv.instances) bad += rec.bad_nodes;
    bad_counts.push_back(bad);
  }
  ojson stats = run_stats_json(sim.mode, inst, res.ledger, trace_json(res.trace), bad_counts,
                               res.trace.depth, valid);
  stats["space_violations"] = enforce_space(res.ledger, sim).violations.size();
  emit_stats(flags, stats);
  write_assignment_file(flags.out_path, res.assignment);
  if (!valid) {
    std::cerr << coloring_report.to_string();
    return kExitValidation;
  }
  return kExitOk;
}

int run_lowspace(const CommonFlags& flags, double eps, double delta,
                 std::uint64_t threshold_override, const std::string& mis_solver) {
  const auto inst = load_instance(flags);
  const auto instance_report = validate_instance(inst);
  if (!instance_report.ok()) {
    std::cerr << instance_report.to_string();
    return kExitValidation;
  }

  const auto params = derive_low_space_params(inst.node_count(), eps, delta, threshold_override);
  SimConfig sim = SimConfig::low_space_mpc(inst.node_count(), eps, inst.size_words());
  sim.cost_table = load_cost_table(flags.cost_table_path);

  LowSpaceConfig config;
  config.hash_independence = flags.hash_c;
  config.hash_domain_bits_node = flags.hash_a;
  config.hash_field_bits_node = flags.hash_b;
  config.hash_field_bits_color = flags.hash_b ? 2 * flags.hash_b : 0;
  config.derand = derand_from_flags(flags);
  if (!mis_solver.empty() && mis_solver != "greedy")
    config.mis_solver = external_mis_solver(mis_solver);

  const auto res = ls_color_reduce(inst, params, config, sim);
  const auto coloring_report = validate_coloring(inst, res.assignment);
  const bool valid = res.assignment.complete && coloring_report.ok();

  std::vector<std::uint64_t> bad_counts;
  for (const auto& lv : res.trace.levels) bad_counts.push_back(lv.bad_machines);
  ojson stats = run_stats_json(sim.mode, inst, res.ledger, ls_trace_json(res.trace), bad_counts,
                               res.trace.depth, valid);
  stats["degree_threshold"] = params.degree_threshold;
  stats["threshold_overridden"] = params.threshold_overridden;
  stats["bin_count"] = params.bin_count;
  stats["space_violations"] = enforce_space(res.ledger, sim).violations.size();
  emit_stats(flags, stats);
  write_assignment_file(flags.out_path, res.assignment);
  if (!valid) {
    std::cerr << coloring_report.to_string();
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic list-coloring engine with machine-model cost accounting"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a list-coloring instance");
  std::string gen_kind = "gnp", gen_variant = "delta-plus-one", gen_prefix = "instance";
  std::uint64_t gen_n = 64, gen_seed = 1;
  double gen_param = 0.1;
  gen->add_option("--kind", gen_kind, "gnp | random-regular | power-law | clique | path");
  gen->add_option("--n", gen_n, "node count")->required();
  gen->add_option("--param", gen_param, "edge probability / degree / attachment count");
  gen->add_option("--variant", gen_variant, "delta-plus-one | deg-plus-one | general-list");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_prefix, "output prefix (<prefix>.graph, <prefix>.palette)");

  auto* color = app.add_subcommand("color", "run the linear-regime engine");
  CommonFlags color_flags;
  add_engine_flags(color, color_flags);

  auto* lowspace = app.add_subcommand("lowspace", "run the sublinear-regime engine");
  CommonFlags ls_flags;
  ls_flags.mode = "low-space-mpc";
  add_engine_flags(lowspace, ls_flags);
  double ls_eps = 2.2, ls_delta = 0.1;
  std::uint64_t ls_override = 0;
  std::string ls_mis_solver = "greedy";
  lowspace->add_option("--eps", ls_eps, "local-space exponent");
  lowspace->add_option("--delta", ls_delta, "bin exponent (<= eps/22)");
  lowspace->add_option("--ls-threshold-override", ls_override,
                       "force the degree threshold (recorded in stats)");
  lowspace->add_option("--mis-solver", ls_mis_solver, "'greedy' or an external command");

  auto* validate = app.add_subcommand("validate", "check an instance and optional assignment");
  std::string val_graph, val_palette, val_assignment;
  validate->add_option("--graph", val_graph, "graph file")->required();
  validate->add_option("--palette", val_palette, "palette file");
  validate->add_option("--assignment", val_assignment, "assignment file to verify");

  auto* census = app.add_subcommand("census", "hash-family independence tables");
  int cen_a = 2, cen_b = 2, cen_c = 2, cen_budget = 24;
  std::string cen_inputs = "0,1";
  census->add_option("--hash-a", cen_a, "domain bits");
  census->add_option("--hash-b", cen_b, "field bits");
  census->add_option("--hash-c", cen_c, "independence");
  census->add_option("--inputs", cen_inputs, "comma-separated input tuple");
  census->add_option("--enum-budget-bits", cen_budget, "seed enumeration budget");

  auto* bench = app.add_subcommand("bench", "run a parameter grid, emit CSV");
  std::vector<std::uint64_t> bench_sizes{256, 512, 1024};
  std::vector<std::uint64_t> bench_seeds{1, 2};
  std::string bench_kind = "gnp", bench_variant = "delta-plus-one";
  double bench_param = 0.05;
  std::uint64_t bench_space_factor = 64;
  std::string bench_out;
  bench->add_option("--sizes", bench_sizes, "node counts")->delimiter(',');
  bench->add_option("--seeds", bench_seeds, "generator seeds")->delimiter(',');
  bench->add_option("--kind", bench_kind, "graph kind");
  bench->add_option("--param", bench_param, "graph parameter");
  bench->add_option("--variant", bench_variant, "palette variant");
  bench->add_option("--space-factor", bench_space_factor, "S = factor * n");
  bench->add_option("--out", bench_out, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const auto inst = generate(graph_kind_from_string(gen_kind), static_cast<NodeId>(gen_n),
                                 gen_param, variant_from_string(gen_variant), gen_seed);
      std::ostringstream gtext, ptext;
      io::write_graph(gtext, inst.graph);
      io::write_palettes(ptext, inst.palettes);
      io::write_file(gen_prefix + ".graph", gtext.str());
      io::write_file(gen_prefix + ".palette", ptext.str());
      return kExitOk;
    }
    if (color->parsed()) return run_color(color_flags);
    if (lowspace->parsed())
      return run_lowspace(ls_flags, ls_eps, ls_delta, ls_override, ls_mis_solver);

    if (validate->parsed()) {
      CommonFlags flags;
      flags.graph_path = val_graph;
      flags.palette_path = val_palette;
      const auto inst = load_instance(flags);
      ValidationReport report = validate_instance(inst);
      if (!val_assignment.empty()) {
        std::ifstream ain(val_assignment);
        if (!ain) throw std::runtime_error("cannot open " + val_assignment);
        auto a = io::read_assignment(ain, inst.node_count(), val_assignment);
        a.complete = true;  // a full assignment is expected; gaps are violations
        report.merge(validate_coloring(inst, a));
      }
      if (!report.ok()) {
        std::cerr << report.to_string();
        return kExitValidation;
      }
      std::cout << "ok\n";
      return kExitOk;
    }

    if (census->parsed()) {
      HashFamilyParams params{cen_a, cen_b, cen_c};
      std::vector<std::uint64_t> inputs;
      std::stringstream ss(cen_inputs);
      std::string item;
      while (std::getline(ss, item, ',')) inputs.push_back(std::stoull(item));
      const auto res = independence_census(params, inputs, cen_budget);
      ojson j;
      j["domain_bits"] = params.domain_bits;
      j["field_bits"] = params.field_bits;
      j["independence"] = params.independence;
      j["inputs"] = inputs;
      j["uniform"] = res.uniform();
      j["counts"] = res.counts;
      std::cout << j.dump(2) << "\n";
      return kExitOk;
    }

    if (bench->parsed()) {
      std::string out;
      bool first = true;
      for (std::uint64_t n : bench_sizes) {
        for (std::uint64_t seed : bench_seeds) {
          const auto inst = generate(graph_kind_from_string(bench_kind), static_cast<NodeId>(n),
                                     bench_param, variant_from_string(bench_variant), seed);
          SimConfig sim =
              SimConfig::linear_mpc(inst.node_count(), bench_space_factor, inst.size_words());
          ColorReduceConfig config;
          config.derand.strategy = DerandStrategy::PoolSearch;
          config.derand.pool_bits = 8;
          const auto res = color_reduce(inst, inst.graph.max_degree(), config, sim);
          const bool valid =
              res.assignment.complete && validate_coloring(inst, res.assignment).ok();
          ojson stats = run_stats_json(sim.mode, inst, res.ledger, ojson::object(), {},
                                       res.trace.depth, valid);
          stats["seed"] = seed;
          out += csv_row(stats, first);
          first = false;
        }
      }
      if (bench_out.empty())
        std::cout << out;
      else
        io::write_file(bench_out, out);
      return kExitOk;
    }
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
