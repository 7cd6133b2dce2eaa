#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace detcolor {

using NodeId = std::uint32_t;

// Undirected simple graph over dense node ids [0, n), stored as sorted
// adjacency in CSR form. Construction symmetrizes and deduplicates the edge
// list and rejects self-loops and out-of-range endpoints, so a built Graph
// always satisfies the structural invariants.
class Graph {
 public:
  Graph() = default;

  static Graph from_edges(NodeId n, std::span<const std::pair<NodeId, NodeId>> edges) {
    std::vector<std::pair<NodeId, NodeId>> dir;
    dir.reserve(edges.size() * 2);
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw std::invalid_argument("graph: edge endpoint out of range");
      if (u == v) throw std::invalid_argument("graph: self-loop");
      dir.emplace_back(u, v);
      dir.emplace_back(v, u);
    }
    std::sort(dir.begin(), dir.end());
    dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

    Graph g;
    g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    g.adj_.reserve(dir.size());
    for (auto [u, v] : dir) {
      ++g.offsets_[u + 1];
      g.adj_.push_back(v);
    }
    for (NodeId v = 0; v < n; ++v) g.offsets_[v + 1] += g.offsets_[v];
    return g;
  }

  NodeId node_count() const {
    return offsets_.empty() ? 0 : static_cast<NodeId>(offsets_.size() - 1);
  }

  std::uint64_t edge_count() const { return adj_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }

  std::uint32_t degree(NodeId v) const {
    return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
  }

  std::uint32_t max_degree() const {
    std::uint32_t d = 0;
    for (NodeId v = 0; v < node_count(); ++v) d = std::max(d, degree(v));
    return d;
  }

  bool has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  // Words to store the graph itself: one per node plus one per directed edge.
  std::uint64_t size_words() const { return node_count() + adj_.size(); }

  // Subgraph induced by `nodes` (sorted, duplicate-free, in range), with ids
  // renumbered densely in the given order.
  Graph induced(std::span<const NodeId> nodes) const {
    std::vector<std::int64_t> to_new(node_count(), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i] >= node_count()) throw std::invalid_argument("induced: unknown node id");
      to_new[nodes[i]] = static_cast<std::int64_t>(i);
    }
    Graph g;
    g.offsets_.assign(nodes.size() + 1, 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (NodeId u : neighbors(nodes[i]))
        if (to_new[u] >= 0) g.adj_.push_back(static_cast<NodeId>(to_new[u]));
      g.offsets_[i + 1] = g.adj_.size();
    }
    return g;
  }

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> adj_;
};

}  // namespace detcolor
