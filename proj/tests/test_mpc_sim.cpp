#include <vector>

#include "detcolor/generate.hpp"
#include "detcolor/mpc_sim.hpp"
#include "detcolor/stats.hpp"
#include "doctest.h"

using namespace detcolor;

TEST_CASE("charge applies the cost table") {
  CostTable table;
  CostLedger ledger;
  ledger.charge(Phase::Partition, Primitive::Sort, 100, 10, table);
  CHECK(ledger.rounds() == 1);
  CHECK(ledger.total_messages() == 100);
  ledger.charge(Phase::Partition, Primitive::LocalStep, 0, 0, table);
  CHECK(ledger.rounds() == 1);  // local computation is free
  ledger.charge(Phase::Collect, Primitive::Route, 50, 50, table);
  CHECK(ledger.rounds() == 2);
  CHECK(ledger.rounds_in(Phase::Collect) == 1);

  CostTable expensive;
  expensive.set(Primitive::Sort, 3);
  CostLedger l2;
  l2.charge(Phase::Partition, Primitive::Sort, 1, 1, expensive);
  CHECK(l2.rounds() == 3);
}

TEST_CASE("parallel merge takes round maxima and message sums") {
  CostTable table;
  CostLedger a, b;
  for (int i = 0; i < 3; ++i) a.charge(Phase::Partition, Primitive::Sort, 10, 5, table);
  for (int i = 0; i < 5; ++i) b.charge(Phase::Partition, Primitive::Sort, 7, 9, table);
  std::vector<CostLedger> branches{a, b};
  const CostLedger merged = CostLedger::merge_parallel(branches);
  CHECK(merged.rounds() == 5);
  CHECK(merged.total_messages() == 30 + 35);
  CHECK(merged.peak_traffic(Phase::Partition) == 9);

  // associativity / commutativity
  std::vector<CostLedger> ba{b, a};
  CHECK(CostLedger::merge_parallel(ba) == merged);
  CostLedger c;
  c.charge(Phase::Collect, Primitive::Route, 1, 1, table);
  std::vector<CostLedger> ab_c{merged, c};
  std::vector<CostLedger> bc{b, c};
  std::vector<CostLedger> a_bc{a, CostLedger::merge_parallel(bc)};
  CHECK(CostLedger::merge_parallel(ab_c) == CostLedger::merge_parallel(a_bc));
}

TEST_CASE("sequential append accumulates rounds") {
  CostTable table;
  CostLedger a, b;
  a.charge(Phase::Partition, Primitive::Sort, 10, 5, table);
  b.charge(Phase::Partition, Primitive::Sort, 10, 50, table);
  a.append_sequential(b);
  CHECK(a.rounds() == 2);
  CHECK(a.total_messages() == 20);
  CHECK(a.peak_traffic(Phase::Partition) == 50);
}

TEST_CASE("enforce_space") {
  SimConfig config = SimConfig::linear_mpc(100, 4, 1000);
  REQUIRE(config.local_space_words == 400);
  CostTable table;
  SUBCASE("within budget") {
    CostLedger ledger;
    ledger.charge(Phase::Collect, Primitive::Route, 400, 400, table);
    ledger.observe_machine_words(Phase::Collect, 400);
    CHECK(enforce_space(ledger, config).ok());
  }
  SUBCASE("one word over names the phase") {
    CostLedger ledger;
    ledger.observe_machine_words(Phase::Collect, 401);
    const auto report = enforce_space(ledger, config);
    CHECK(report.count("space-exceeded") == 1);
    CHECK(report.violations[0].detail.find("collect") != std::string::npos);
  }
  SUBCASE("congc adds the routing traffic bound") {
    SimConfig cc = SimConfig::congested_clique(100, 4);
    CostLedger ledger;
    ledger.charge(Phase::Partition, Primitive::Route, 500, 401, table);
    CHECK(enforce_space(ledger, cc).count("lenzen-bound") == 1);
  }
  SUBCASE("total space must hold the input") {
    SimConfig tiny;
    tiny.mode = SimMode::LinearMpc;
    tiny.local_space_words = 10;
    tiny.machine_count = 1;
    CHECK_FALSE(tiny.validate(100).ok());
    CHECK(config.validate(1000).ok());
  }
}

TEST_CASE("ledger determinism and report consistency") {
  CostTable table;
  auto run = [&] {
    CostLedger ledger;
    ledger.charge(Phase::Derandomize, Primitive::PrefixSum, 64, 8, table);
    ledger.charge(Phase::Partition, Primitive::Sort, 128, 16, table);
    ledger.charge(Phase::Collect, Primitive::Route, 256, 256, table);
    ledger.charge_mis_rounds(7);
    ledger.observe_global_words(999);
    return ledger;
  };
  CHECK(run() == run());

  const auto j = ledger_json(run());
  CHECK(j["rounds"] ==
        j["rounds_by_phase"]["partition"].get<std::uint64_t>() +
            j["rounds_by_phase"]["derandomize"].get<std::uint64_t>() +
            j["rounds_by_phase"]["collect"].get<std::uint64_t>() +
            j["rounds_by_phase"]["mis"].get<std::uint64_t>());
  CHECK(j["mis_rounds_parametric"] == 7);
  CHECK(j["global_words"] == 999);

  // fresh ledger reports all zeros
  const auto zero = ledger_json(CostLedger{});
  CHECK(zero["rounds"] == 0);
  CHECK(zero["total_messages"] == 0);
  CHECK(zero["max_machine_words"] == 0);
}

TEST_CASE("stats record carries the published schema") {
  const auto inst = generate(GraphKind::Path, 8, 0, PaletteVariant::DegPlusOne, 1);
  CostLedger ledger;
  const ojson j = run_stats_json(SimMode::LinearMpc, inst, ledger, ojson::object(), {0, 2}, 1, true);
  for (const char* key :
       {"mode", "n", "m", "delta", "rounds", "rounds_by_phase", "recursion_depth",
        "bad_node_counts", "max_machine_words", "global_words", "mis_rounds_parametric", "valid"})
    CHECK(j.contains(key));
  CHECK(j["mode"] == "linear-mpc");
  CHECK(j["n"] == 8);
  CHECK(j["m"] == 7);
  CHECK(j["bad_node_counts"] == std::vector<std::uint64_t>{0, 2});

  // byte-identical serialization for identical inputs
  const ojson j2 = run_stats_json(SimMode::LinearMpc, inst, ledger, ojson::object(), {0, 2}, 1, true);
  CHECK(j.dump(2) == j2.dump(2));

  // CSV flattening covers the scalar fields
  const std::string csv = csv_row(j, true);
  CHECK(csv.find("rounds_by_phase.partition") != std::string::npos);
  CHECK(csv.find("\"linear-mpc\"") != std::string::npos);
}
