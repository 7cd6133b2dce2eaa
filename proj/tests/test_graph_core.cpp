#include <sstream>
#include <vector>

#include "detcolor/coloring.hpp"
#include "detcolor/generate.hpp"
#include "detcolor/instance.hpp"
#include "detcolor/io.hpp"
#include "doctest.h"

using namespace detcolor;

namespace {

ListColoringInstance make_instance(NodeId n, std::vector<std::pair<NodeId, NodeId>> edges,
                                   std::vector<std::vector<ColorId>> palettes,
                                   PaletteVariant variant = PaletteVariant::GeneralList) {
  ListColoringInstance inst;
  inst.graph = Graph::from_edges(n, edges);
  inst.palettes = PaletteSet::packed(std::move(palettes));
  inst.variant = variant;
  inst.color_universe = static_cast<std::uint64_t>(n) * n;
  return inst;
}

}  // namespace

TEST_CASE("validate_instance: degenerate, undersized, and well-formed cases") {
  SUBCASE("single node with palette {0}") {
    auto inst = make_instance(1, {}, {{0}});
    CHECK(validate_instance(inst).ok());
  }
  SUBCASE("edge with both palettes {0}: palette size <= degree at both ends") {
    auto inst = make_instance(2, {{0, 1}}, {{0}, {0}});
    const auto report = validate_instance(inst);
    CHECK(report.count("palette-too-small") == 2);
  }
  SUBCASE("triangle with palettes {0,1,2}") {
    auto inst = make_instance(3, {{0, 1}, {1, 2}, {0, 2}}, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}});
    CHECK(validate_instance(inst).ok());
  }
  SUBCASE("color outside the universe") {
    auto inst = make_instance(2, {{0, 1}}, {{0, 5}, {1, 2}});
    inst.color_universe = 4;
    CHECK(validate_instance(inst).count("color-out-of-universe") == 1);
  }
}

TEST_CASE("validate_coloring: legal, monochromatic, off-palette") {
  auto tri = make_instance(3, {{0, 1}, {1, 2}, {0, 2}}, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}});
  SUBCASE("legal triangle coloring") {
    ColoringAssignment a(3);
    a.color = {0, 1, 2};
    a.complete = true;
    CHECK(validate_coloring(tri, a).ok());
  }
  SUBCASE("monochromatic edge") {
    auto inst = make_instance(2, {{0, 1}}, {{0, 1}, {0, 1}});
    ColoringAssignment a(2);
    a.color = {0, 0};
    CHECK(validate_coloring(inst, a).count("monochromatic-edge") == 1);
  }
  SUBCASE("off-palette color") {
    auto inst = make_instance(1, {}, {{0, 1}});
    ColoringAssignment a(1);
    a.color = {5};
    CHECK(validate_coloring(inst, a).count("off-palette") == 1);
  }
  SUBCASE("incomplete assignment flagged only when claimed complete") {
    ColoringAssignment a(3);
    a.color = {0, kUncolored, 1};
    CHECK(validate_coloring(tri, a).ok());
    a.complete = true;
    CHECK(validate_coloring(tri, a).count("uncolored-node") == 1);
  }
}

TEST_CASE("greedy_color: first-fit behavior") {
  SUBCASE("edge, order (u,v)") {
    auto inst = make_instance(2, {{0, 1}}, {{0, 1}, {0, 1}});
    const auto res = greedy_color(inst, std::vector<NodeId>{0, 1});
    REQUIRE(res.ok);
    CHECK(res.assignment.color == std::vector<std::int64_t>{0, 1});
  }
  SUBCASE("triangle in id order") {
    auto inst = make_instance(3, {{0, 1}, {1, 2}, {0, 2}}, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}});
    const auto res = greedy_color(inst, std::vector<NodeId>{0, 1, 2});
    REQUIRE(res.ok);
    CHECK(res.assignment.color == std::vector<std::int64_t>{0, 1, 2});
  }
  SUBCASE("star with leaves first") {
    // center 0 with palette {0,1,2,3}, leaves with palette {0}
    auto inst = make_instance(4, {{0, 1}, {0, 2}, {0, 3}}, {{0, 1, 2, 3}, {0}, {0}, {0}});
    const auto res = greedy_color(inst, std::vector<NodeId>{1, 2, 3, 0});
    REQUIRE(res.ok);
    CHECK(res.assignment.color == std::vector<std::int64_t>{1, 0, 0, 0});
  }
  SUBCASE("stuck node reported when palettes are exhausted") {
    auto inst = make_instance(2, {{0, 1}}, {{0}, {0}});
    const auto res = greedy_color(inst, std::vector<NodeId>{0, 1});
    CHECK_FALSE(res.ok);
    CHECK(res.stuck_node == 1);
  }
}

TEST_CASE("induced_subinstance") {
  auto tri = make_instance(3, {{0, 1}, {1, 2}, {0, 2}}, {{0, 1, 2}, {0, 1}, {1, 2}});
  SUBCASE("triangle restricted to an edge") {
    const auto sub = induced_subinstance(tri, std::vector<NodeId>{0, 1});
    CHECK(sub.instance.node_count() == 2);
    CHECK(sub.instance.graph.edge_count() == 1);
    CHECK(sub.to_parent == std::vector<NodeId>{0, 1});
    CHECK(sub.instance.palettes.materialize(1) == std::vector<ColorId>{0, 1});
  }
  SUBCASE("identity on the full node set") {
    const auto sub = induced_subinstance(tri, std::vector<NodeId>{0, 1, 2});
    CHECK(sub.instance.graph.edge_count() == 3);
    CHECK(sub.to_parent == std::vector<NodeId>{0, 1, 2});
  }
  SUBCASE("5-cycle on {0,2,4}: the closing edge 0-4 survives") {
    auto c5 = make_instance(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}},
                            {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}, {0, 1, 2}, {0, 1, 2}});
    const auto sub = induced_subinstance(c5, std::vector<NodeId>{0, 2, 4});
    // enumerating pairs of {0,2,4} against the cycle edges: only {4,0} is an edge
    CHECK(sub.instance.graph.edge_count() == 1);
    CHECK(sub.instance.graph.has_edge(0, 2));  // renumbered ids of 0 and 4
    CHECK(sub.instance.graph.degree(1) == 0);  // old node 2 is isolated
  }
  SUBCASE("unknown node id") {
    CHECK_THROWS(induced_subinstance(tri, std::vector<NodeId>{0, 7}));
  }
}

TEST_CASE("remove_used_colors") {
  auto inst = make_instance(1, {}, {{1, 2, 3}});
  SUBCASE("removes exactly the listed members") {
    const auto out = remove_used_colors(inst, {{1, 3}});
    CHECK(out.palettes.materialize(0) == std::vector<ColorId>{2});
    CHECK(out.palettes.size(0) == 1);
  }
  SUBCASE("empty removal is the identity") {
    const auto out = remove_used_colors(inst, {{}});
    CHECK(out.palettes.materialize(0) == std::vector<ColorId>{1, 2, 3});
  }
  SUBCASE("disjoint removal is ignored") {
    const auto out = remove_used_colors(inst, {{4}});
    CHECK(out.palettes.materialize(0) == std::vector<ColorId>{1, 2, 3});
  }
}

TEST_CASE("generate: shapes, palettes, determinism") {
  SUBCASE("clique n=4 delta-plus-one") {
    const auto inst = generate(GraphKind::Clique, 4, 0, PaletteVariant::DeltaPlusOne, 1);
    CHECK(inst.graph.edge_count() == 6);
    for (NodeId v = 0; v < 4; ++v)
      CHECK(inst.palettes.materialize(v) == std::vector<ColorId>{0, 1, 2, 3});
    CHECK(validate_instance(inst).ok());
  }
  SUBCASE("path n=3 deg-plus-one has palette sizes 2,3,2") {
    const auto inst = generate(GraphKind::Path, 3, 0, PaletteVariant::DegPlusOne, 1);
    CHECK(inst.palettes.size(0) == 2);
    CHECK(inst.palettes.size(1) == 3);
    CHECK(inst.palettes.size(2) == 2);
    CHECK(validate_instance(inst).ok());
  }
  SUBCASE("gnp generation is deterministic in the seed") {
    const auto a = generate(GraphKind::Gnp, 100, 0.1, PaletteVariant::GeneralList, 7);
    const auto b = generate(GraphKind::Gnp, 100, 0.1, PaletteVariant::GeneralList, 7);
    REQUIRE(a.graph.edge_count() == b.graph.edge_count());
    for (NodeId v = 0; v < 100; ++v) {
      CHECK(a.graph.degree(v) == b.graph.degree(v));
      CHECK(a.palettes.materialize(v) == b.palettes.materialize(v));
    }
    const auto c = generate(GraphKind::Gnp, 100, 0.1, PaletteVariant::GeneralList, 8);
    CHECK(a.graph.edge_count() != c.graph.edge_count());
  }
  SUBCASE("invalid parameters are rejected") {
    CHECK_THROWS(generate(GraphKind::Gnp, 10, 1.5, PaletteVariant::DeltaPlusOne, 1));
    CHECK_THROWS(generate(GraphKind::RandomRegular, 9, 3.0, PaletteVariant::DeltaPlusOne, 1));
  }
}

TEST_CASE("generated corpus properties: greedy succeeds and validates") {
  const std::vector<std::tuple<GraphKind, NodeId, double>> shapes = {
      {GraphKind::Gnp, 64, 0.1},         {GraphKind::Gnp, 128, 0.05},
      {GraphKind::RandomRegular, 64, 6}, {GraphKind::PowerLaw, 96, 3},
      {GraphKind::Clique, 24, 0},        {GraphKind::Path, 50, 0}};
  Rng order_rng(71);
  for (const auto variant :
       {PaletteVariant::DeltaPlusOne, PaletteVariant::DegPlusOne, PaletteVariant::GeneralList}) {
    for (const auto& [kind, n, param] : shapes) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto inst = generate(kind, n, param, variant, seed);
        REQUIRE(validate_instance(inst).ok());
        // first-fit succeeds and validates under the identity order and a
        // shuffled order alike
        auto order = identity_order(inst.node_count());
        for (int pass = 0; pass < 2; ++pass) {
          const auto res = greedy_color(inst, order);
          REQUIRE(res.ok);
          CHECK(validate_coloring(inst, res.assignment).ok());
          for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[order_rng.bounded(i)]);
        }
      }
    }
  }
}

TEST_CASE("induced subinstance round-trips node ids") {
  const auto inst = generate(GraphKind::Gnp, 60, 0.15, PaletteVariant::GeneralList, 5);
  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < 60; v += 3) nodes.push_back(v);
  const auto sub = induced_subinstance(inst, nodes);
  REQUIRE(sub.to_parent.size() == nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    CHECK(sub.to_parent[i] == nodes[i]);
    CHECK(sub.instance.palettes.materialize(static_cast<NodeId>(i)) ==
          inst.palettes.materialize(nodes[i]));
  }
  // edges match membership in the parent graph
  for (NodeId i = 0; i < sub.instance.node_count(); ++i)
    for (NodeId j : sub.instance.graph.neighbors(i))
      CHECK(inst.graph.has_edge(sub.to_parent[i], sub.to_parent[j]));
}

TEST_CASE("graph and palette files round-trip") {
  const auto inst = generate(GraphKind::Gnp, 40, 0.2, PaletteVariant::DegPlusOne, 11);
  std::stringstream gfile, pfile;
  io::write_graph(gfile, inst.graph);
  io::write_palettes(pfile, inst.palettes);
  const Graph g2 = io::read_graph(gfile);
  const PaletteSet p2 = io::read_palettes(pfile);
  CHECK(g2.edge_count() == inst.graph.edge_count());
  for (NodeId v = 0; v < 40; ++v) {
    CHECK(g2.degree(v) == inst.graph.degree(v));
    CHECK(p2.materialize(v) == inst.palettes.materialize(v));
  }

  ColoringAssignment a(3);
  a.color = {5, kUncolored, 2};
  std::stringstream afile;
  io::write_assignment(afile, a);
  const auto a2 = io::read_assignment(afile, 3);
  CHECK(a2.color == a.color);
  CHECK_FALSE(a2.complete);
}

TEST_CASE("malformed files produce line-numbered diagnostics") {
  std::stringstream bad("graph 2 1\n0 2\n");
  CHECK_THROWS_WITH_AS(io::read_graph(bad, "g.txt"), "g.txt:2: edge endpoint out of range",
                       ParseError);
  std::stringstream bad2("palette 1\n0 2 7\n");
  CHECK_THROWS_AS(io::read_palettes(bad2, "p.txt"), ParseError);
}
