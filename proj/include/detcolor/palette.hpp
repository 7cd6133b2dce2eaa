#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "detcolor/graph.hpp"
#include "detcolor/hash_family.hpp"

namespace detcolor {

using ColorId = std::uint64_t;

// One link of a palette restriction chain: a color survives the link when
// the hash maps it to the required bin. Bins are 1-based; the hash range is
// the number of color bins of the partition that created the link.
struct PaletteRestriction {
  HashFamilyParams params;
  BitString seed;
  std::uint64_t bin = 1;
  std::uint64_t range = 1;

  bool admits(ColorId c) const {
    return hash_evaluate_range(params, seed, c, RangeSpec{range}) + 1 == bin;
  }
};

// Per-node color palettes for one coloring instance.
//
// The base is either a shared contiguous range [0, hi) or explicit per-node
// sorted lists. On top of the base sits a restriction chain shared by all
// nodes of the instance, plus per-node exclusion lists (colors removed
// because a neighbor used them). A color belongs to node v's palette iff it
// is in v's base, survives every chain link, and is not excluded. Palettes
// with a chain never materialize the filtered color set; storage is
// O(|exclusions| + |chain|).
class PaletteSet {
 public:
  enum class BaseKind { Range, Packed };

  PaletteSet() = default;

  static PaletteSet uniform_range(NodeId n, ColorId hi) {
    PaletteSet p;
    p.kind_ = BaseKind::Range;
    p.n_ = n;
    p.range_hi_ = hi;
    p.excl_.resize(n);
    p.sizes_.assign(n, hi);
    return p;
  }

  static PaletteSet packed(std::vector<std::vector<ColorId>> lists) {
    PaletteSet p;
    p.kind_ = BaseKind::Packed;
    p.n_ = static_cast<NodeId>(lists.size());
    p.offsets_.assign(p.n_ + 1, 0);
    for (NodeId v = 0; v < p.n_; ++v) {
      auto& l = lists[v];
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
      if (!l.empty()) p.max_color_ = std::max(p.max_color_, l.back());
      p.colors_.insert(p.colors_.end(), l.begin(), l.end());
      p.offsets_[v + 1] = p.colors_.size();
    }
    p.excl_.resize(p.n_);
    p.sizes_.resize(p.n_);
    for (NodeId v = 0; v < p.n_; ++v) p.sizes_[v] = p.offsets_[v + 1] - p.offsets_[v];
    return p;
  }

  // One past the largest color any node can hold; lets classifiers build
  // per-seed color tables instead of hashing every palette entry.
  ColorId color_span() const {
    return kind_ == BaseKind::Range ? range_hi_ : (colors_.empty() ? 0 : max_color_ + 1);
  }

  NodeId node_count() const { return n_; }
  BaseKind base_kind() const { return kind_; }
  const std::vector<PaletteRestriction>& chain() const { return chain_; }
  std::span<const ColorId> exclusions(NodeId v) const { return excl_[v]; }
  ColorId range_hi() const { return range_hi_; }

  // True when every node sees the same base and chain (exclusions may still
  // differ); enables shared counting in the partition classifiers.
  bool uniform_base() const { return kind_ == BaseKind::Range; }

  std::uint64_t size(NodeId v) const { return sizes_[v]; }

  bool contains(NodeId v, ColorId c) const {
    if (!base_contains(v, c)) return false;
    for (const auto& link : chain_)
      if (!link.admits(c)) return false;
    return !std::binary_search(excl_[v].begin(), excl_[v].end(), c);
  }

  // Visits v's colors in ascending order; stops early when f returns false.
  template <class F>
  void for_each(NodeId v, F&& f) const {
    auto emit = [&](ColorId c) {
      for (const auto& link : chain_)
        if (!link.admits(c)) return true;
      if (std::binary_search(excl_[v].begin(), excl_[v].end(), c)) return true;
      return static_cast<bool>(f(c));
    };
    if (kind_ == BaseKind::Range) {
      for (ColorId c = 0; c < range_hi_; ++c)
        if (!emit(c)) return;
    } else {
      for (std::uint64_t i = offsets_[v]; i < offsets_[v + 1]; ++i)
        if (!emit(colors_[i])) return;
    }
  }

  std::vector<ColorId> materialize(NodeId v) const {
    std::vector<ColorId> out;
    out.reserve(sizes_[v]);
    for_each(v, [&](ColorId c) {
      out.push_back(c);
      return true;
    });
    return out;
  }

  // Appends a chain link applying to every node.
  PaletteSet restricted(const PaletteRestriction& link) const {
    PaletteSet p = *this;
    p.chain_.push_back(link);
    for (NodeId v = 0; v < p.n_; ++v) {
      auto& ex = p.excl_[v];
      ex.erase(std::remove_if(ex.begin(), ex.end(), [&](ColorId c) { return !link.admits(c); }),
               ex.end());
    }
    p.recount();
    return p;
  }

  // Removes the listed colors from each node's palette. Entries that are not
  // currently members (or repeat within the list) are ignored, so at most one
  // color disappears per distinct member listed.
  PaletteSet with_exclusions(const std::vector<std::vector<ColorId>>& extra) const {
    if (extra.size() != n_) throw std::invalid_argument("with_exclusions: size mismatch");
    PaletteSet p = *this;
    for (NodeId v = 0; v < n_; ++v) {
      std::vector<ColorId> add = extra[v];
      std::sort(add.begin(), add.end());
      add.erase(std::unique(add.begin(), add.end()), add.end());
      add.erase(std::remove_if(add.begin(), add.end(),
                               [&](ColorId c) { return !contains(v, c); }),
                add.end());
      if (add.empty()) continue;
      p.excl_[v].insert(p.excl_[v].end(), add.begin(), add.end());
      std::sort(p.excl_[v].begin(), p.excl_[v].end());
      p.sizes_[v] -= add.size();
    }
    return p;
  }

  // Palettes for the sub-instance on `nodes` (renumbered in the given order).
  PaletteSet subset(std::span<const NodeId> nodes) const {
    PaletteSet p;
    p.kind_ = kind_;
    p.range_hi_ = range_hi_;
    p.chain_ = chain_;
    p.n_ = static_cast<NodeId>(nodes.size());
    p.excl_.reserve(p.n_);
    p.sizes_.reserve(p.n_);
    if (kind_ == BaseKind::Packed) {
      p.offsets_.assign(p.n_ + 1, 0);
      for (NodeId i = 0; i < p.n_; ++i) {
        NodeId v = nodes[i];
        p.colors_.insert(p.colors_.end(), colors_.begin() + offsets_[v],
                         colors_.begin() + offsets_[v + 1]);
        p.offsets_[i + 1] = p.colors_.size();
      }
    }
    for (NodeId v : nodes) {
      p.excl_.push_back(excl_[v]);
      p.sizes_.push_back(sizes_[v]);
    }
    return p;
  }

  // Fully materialized copy: packed base, no chain, no exclusions.
  PaletteSet materialized() const {
    std::vector<std::vector<ColorId>> lists(n_);
    for (NodeId v = 0; v < n_; ++v) lists[v] = materialize(v);
    return packed(std::move(lists));
  }

  // Materializes each palette, keeping only the `keep[v]` smallest members.
  // Used when a collected instance only needs deg+1 colors per node.
  PaletteSet truncated(std::span<const std::uint64_t> keep) const {
    std::vector<std::vector<ColorId>> lists(n_);
    for (NodeId v = 0; v < n_; ++v) {
      std::uint64_t want = std::min<std::uint64_t>(keep[v], sizes_[v]);
      lists[v].reserve(want);
      for_each(v, [&](ColorId c) {
        if (lists[v].size() >= want) return false;
        lists[v].push_back(c);
        return true;
      });
    }
    return packed(std::move(lists));
  }

  // Storage footprint in words under the implicit representation: chain links
  // cost a seed each, exclusions one word per color; a packed base costs one
  // word per stored color, a range base is two words total.
  std::uint64_t size_words() const {
    std::uint64_t words = kind_ == BaseKind::Range ? 2 : colors_.size();
    words += chain_.size() * 2;
    for (const auto& ex : excl_) words += ex.size();
    return words;
  }

 private:
  bool base_contains(NodeId v, ColorId c) const {
    if (kind_ == BaseKind::Range) return c < range_hi_;
    return std::binary_search(colors_.begin() + offsets_[v], colors_.begin() + offsets_[v + 1], c);
  }

  void recount() {
    if (kind_ == BaseKind::Range) {
      // Shared base and chain: count once and adjust per node by exclusions.
      std::uint64_t shared = 0;
      for (ColorId c = 0; c < range_hi_; ++c) {
        bool in = true;
        for (const auto& link : chain_)
          if (!link.admits(c)) {
            in = false;
            break;
          }
        shared += in;
      }
      for (NodeId v = 0; v < n_; ++v) sizes_[v] = shared - excl_[v].size();
    } else {
      for (NodeId v = 0; v < n_; ++v) {
        std::uint64_t cnt = 0;
        for (std::uint64_t i = offsets_[v]; i < offsets_[v + 1]; ++i) {
          bool in = true;
          for (const auto& link : chain_)
            if (!link.admits(colors_[i])) {
              in = false;
              break;
            }
          cnt += in;
        }
        sizes_[v] = cnt - excl_[v].size();
      }
    }
  }

  BaseKind kind_ = BaseKind::Range;
  NodeId n_ = 0;
  ColorId range_hi_ = 0;
  ColorId max_color_ = 0;
  std::vector<std::uint64_t> offsets_;
  std::vector<ColorId> colors_;
  std::vector<PaletteRestriction> chain_;
  std::vector<std::vector<ColorId>> excl_;
  std::vector<std::uint64_t> sizes_;
};

}  // namespace detcolor
