#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "detcolor/instance.hpp"

namespace detcolor {

// splitmix64: small, fully specified, identical everywhere. Standard library
// distributions are implementation-defined, so instance generation avoids
// them entirely.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by rejection from the top 64-bit range.
  std::uint64_t bounded(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("rng: zero bound");
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

enum class GraphKind { Gnp, RandomRegular, PowerLaw, Clique, Path };

inline const char* to_string(GraphKind k) {
  switch (k) {
    case GraphKind::Gnp: return "gnp";
    case GraphKind::RandomRegular: return "random-regular";
    case GraphKind::PowerLaw: return "power-law";
    case GraphKind::Clique: return "clique";
    case GraphKind::Path: return "path";
  }
  return "?";
}

inline GraphKind graph_kind_from_string(const std::string& s) {
  if (s == "gnp") return GraphKind::Gnp;
  if (s == "random-regular") return GraphKind::RandomRegular;
  if (s == "power-law") return GraphKind::PowerLaw;
  if (s == "clique") return GraphKind::Clique;
  if (s == "path") return GraphKind::Path;
  throw std::invalid_argument("unknown graph kind: " + s);
}

inline PaletteVariant variant_from_string(const std::string& s) {
  if (s == "delta-plus-one") return PaletteVariant::DeltaPlusOne;
  if (s == "deg-plus-one") return PaletteVariant::DegPlusOne;
  if (s == "general-list") return PaletteVariant::GeneralList;
  throw std::invalid_argument("unknown palette variant: " + s);
}

namespace detail {

inline Graph gen_gnp(NodeId n, double p, Rng& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("gnp: p outside [0,1]");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (rng.unit() < p) edges.emplace_back(u, v);
  return Graph::from_edges(n, edges);
}

// Configuration model with local repair: when the next stub pair would form
// a self-loop or duplicate edge, swap in a random stub from the unpaired
// tail. Restarts from scratch in the rare case a position cannot be fixed.
inline Graph gen_random_regular(NodeId n, std::uint32_t d, Rng& rng) {
  if (d >= n || (static_cast<std::uint64_t>(n) * d) % 2 != 0)
    throw std::invalid_argument("random-regular: need d < n and n*d even");
  auto edge_key = [](NodeId u, NodeId v) {
    return (static_cast<std::uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
  };
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<NodeId> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * d);
    for (NodeId v = 0; v < n; ++v)
      for (std::uint32_t i = 0; i < d; ++i) stubs.push_back(v);
    for (std::size_t i = stubs.size(); i > 1; --i)
      std::swap(stubs[i - 1], stubs[rng.bounded(i)]);

    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<NodeId, NodeId>> edges;
    bool good = true;
    for (std::size_t i = 0; good && i + 1 < stubs.size(); i += 2) {
      const NodeId u = stubs[i];
      int tries = 0;
      while (stubs[i + 1] == u || seen.contains(edge_key(u, stubs[i + 1]))) {
        if (i + 2 >= stubs.size() || ++tries > 200) {
          good = false;
          break;
        }
        std::swap(stubs[i + 1], stubs[i + 1 + 1 + rng.bounded(stubs.size() - i - 2)]);
      }
      if (!good) break;
      seen.insert(edge_key(u, stubs[i + 1]));
      edges.emplace_back(u, stubs[i + 1]);
    }
    if (good) return Graph::from_edges(n, edges);
  }
  throw std::runtime_error("random-regular: pairing failed; parameters too tight");
}

// Preferential attachment: each new node attaches `m` edges to existing
// nodes with probability proportional to degree.
inline Graph gen_power_law(NodeId n, std::uint32_t m, Rng& rng) {
  if (m < 1 || m >= n) throw std::invalid_argument("power-law: need 1 <= m < n");
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<NodeId> targets;  // one entry per edge endpoint
  for (NodeId v = 0; v <= m; ++v)
    for (NodeId u = v + 1; u <= m; ++u) {
      edges.emplace_back(v, u);
      targets.push_back(v);
      targets.push_back(u);
    }
  for (NodeId v = m + 1; v < n; ++v) {
    std::unordered_set<NodeId> chosen;
    while (chosen.size() < m) chosen.insert(targets[rng.bounded(targets.size())]);
    for (NodeId u : chosen) {
      edges.emplace_back(v, u);
      targets.push_back(v);
      targets.push_back(u);
    }
  }
  return Graph::from_edges(n, edges);
}

inline Graph gen_clique(NodeId n) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return Graph::from_edges(n, edges);
}

inline Graph gen_path(NodeId n) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
  return Graph::from_edges(n, edges);
}

inline std::vector<ColorId> sample_distinct(std::uint64_t count, std::uint64_t hi, Rng& rng) {
  std::unordered_set<ColorId> set;
  while (set.size() < count) set.insert(rng.bounded(hi));
  std::vector<ColorId> out(set.begin(), set.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// Deterministic instance generation: identical (kind, n, param, variant,
// seed) inputs produce identical instances. For deg-plus-one and
// general-list palettes, colors are drawn from a universe a small factor
// above Delta+1 so neighboring palettes actually collide.
inline ListColoringInstance generate(GraphKind kind, NodeId n, double param,
                                     PaletteVariant variant, std::uint64_t rng_seed) {
  if (n < 1) throw std::invalid_argument("generate: need n >= 1");
  Rng rng(rng_seed);
  Graph g;
  switch (kind) {
    case GraphKind::Gnp: g = detail::gen_gnp(n, param, rng); break;
    case GraphKind::RandomRegular:
      g = detail::gen_random_regular(n, static_cast<std::uint32_t>(param), rng);
      break;
    case GraphKind::PowerLaw:
      g = detail::gen_power_law(n, static_cast<std::uint32_t>(param), rng);
      break;
    case GraphKind::Clique: g = detail::gen_clique(n); break;
    case GraphKind::Path: g = detail::gen_path(n); break;
  }

  ListColoringInstance inst;
  const std::uint64_t universe = static_cast<std::uint64_t>(n) * n;
  const std::uint32_t delta = g.max_degree();
  inst.variant = variant;
  inst.color_universe = universe;

  if (variant == PaletteVariant::DeltaPlusOne) {
    inst.palettes = PaletteSet::uniform_range(n, delta + 1);
  } else {
    const std::uint64_t hi = std::min<std::uint64_t>(universe, 2 * (delta + 1ull));
    std::vector<std::vector<ColorId>> lists(n);
    for (NodeId v = 0; v < n; ++v) {
      std::uint64_t want = g.degree(v) + 1ull;
      if (variant == PaletteVariant::GeneralList) {
        const std::uint64_t cap = std::min<std::uint64_t>(universe, 4 * (delta + 1ull));
        want = std::min<std::uint64_t>(want + rng.bounded(delta / 2 + 2), cap);
        lists[v] = detail::sample_distinct(want, cap, rng);
      } else {
        lists[v] = detail::sample_distinct(want, std::max<std::uint64_t>(hi, want), rng);
      }
    }
    inst.palettes = PaletteSet::packed(std::move(lists));
  }
  inst.graph = std::move(g);
  return inst;
}

}  // namespace detcolor
