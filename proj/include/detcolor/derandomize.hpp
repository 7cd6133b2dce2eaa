#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "detcolor/bits.hpp"

namespace detcolor {

// Behavioral contract for derandomization targets. The cost of a full seed
// is exact, deterministic, and decomposes as a sum of per-unit local costs
// (nodes, bins, machines); the evaluator returns the already-summed total.
class CostFunction {
 public:
  virtual ~CostFunction() = default;
  virtual int seed_bits() const = 0;
  virtual std::uint64_t evaluate(const BitString& seed) const = 0;
};

class FunctionCost final : public CostFunction {
 public:
  FunctionCost(int bits, std::function<std::uint64_t(const BitString&)> fn)
      : bits_(bits), fn_(std::move(fn)) {}
  int seed_bits() const override { return bits_; }
  std::uint64_t evaluate(const BitString& seed) const override { return fn_(seed); }

 private:
  int bits_;
  std::function<std::uint64_t(const BitString&)> fn_;
};

// Exact expectation of an integer cost over a power-of-two seed set,
// kept as sum / 2^completions_log2 so chains of conditional expectations
// compare without rounding.
struct ExactExpectation {
  std::uint64_t sum = 0;
  int completions_log2 = 0;

  double value() const {
    return static_cast<double>(sum) / static_cast<double>(std::uint64_t{1} << completions_log2);
  }

  // this <= other, cross-multiplied in 128 bits.
  bool leq(const ExactExpectation& other) const {
    const unsigned __int128 lhs =
        static_cast<unsigned __int128>(sum) << other.completions_log2;
    const unsigned __int128 rhs =
        static_cast<unsigned __int128>(other.sum) << completions_log2;
    return lhs <= rhs;
  }
};

struct SeedPrefix {
  BitString bits;
  int total_len = 0;
};

// Average of the cost over every completion of the prefix. The whole suffix
// space is enumerated, so (total - prefix) bits must fit the budget.
inline ExactExpectation conditional_cost_exact(const CostFunction& cost, const SeedPrefix& prefix,
                                               int budget_bits = 24) {
  const int total = prefix.total_len;
  if (total != cost.seed_bits()) throw std::invalid_argument("conditional cost: length mismatch");
  const int fixed = prefix.bits.size();
  if (fixed > total) throw std::invalid_argument("conditional cost: prefix too long");
  const int rem = total - fixed;
  if (rem > budget_bits) throw std::invalid_argument("conditional cost: enumeration budget exceeded");

  ExactExpectation e;
  e.completions_log2 = rem;
  const std::uint64_t completions = std::uint64_t{1} << rem;
  BitString seed = prefix.bits.extended(rem, 0);
  for (std::uint64_t i = 0; i < completions; ++i) {
    seed.set_slice(fixed, rem, i);
    e.sum += cost.evaluate(seed);
  }
  return e;
}

enum class DerandStrategy { ExactEnumeration, PoolSearch };

inline const char* to_string(DerandStrategy s) {
  return s == DerandStrategy::ExactEnumeration ? "exact" : "pool";
}

struct ChunkSchedule {
  int chunk_bits = 8;
  DerandStrategy strategy = DerandStrategy::ExactEnumeration;
  int enum_budget_bits = 24;
};

// A deterministic seed pool: `base` with the bits at `positions` replaced by
// the counter. Pool member order follows the counter, most significant
// varying bit first.
struct SeedPool {
  BitString base;
  std::vector<int> positions;

  std::uint64_t size() const { return std::uint64_t{1} << positions.size(); }

  BitString member(std::uint64_t i) const {
    BitString s = base;
    const int w = static_cast<int>(positions.size());
    for (int b = 0; b < w; ++b) s.set_bit(positions[b], (i >> (w - 1 - b)) & 1u);
    return s;
  }
};

struct DerandCertificate {
  DerandStrategy strategy = DerandStrategy::ExactEnumeration;
  ExactExpectation initial_expectation;  // over the whole seed space (exact mode)
  struct Step {
    int prefix_bits = 0;            // bits fixed after this step
    std::uint64_t chunk_value = 0;  // value chosen for the chunk
    ExactExpectation conditional;   // E[cost | chosen prefix]
  };
  std::vector<Step> steps;
  std::uint64_t final_cost = 0;

  // pool mode
  std::uint64_t pool_size = 0;
  std::uint64_t pool_cost_sum = 0;  // exact mean = pool_cost_sum / pool_size

  // The monotone chain the certificate claims; verified by tests, not trusted.
  bool chain_non_increasing() const {
    ExactExpectation prev = initial_expectation;
    for (const auto& s : steps) {
      if (!s.conditional.leq(prev)) return false;
      prev = s.conditional;
    }
    return true;
  }

  bool final_leq_mean() const {
    if (strategy == DerandStrategy::ExactEnumeration) {
      const ExactExpectation fin{final_cost, 0};
      return fin.leq(initial_expectation);
    }
    return static_cast<unsigned __int128>(final_cost) * pool_size <= pool_cost_sum;
  }
};

struct FixSeedResult {
  BitString seed;
  DerandCertificate certificate;
};

// Method of conditional expectations over the prefix-structured seed space:
// fixes chunk_bits at a time, keeping the exact conditional expectation
// non-increasing; ties break toward the smallest chunk value. The returned
// seed satisfies cost(seed) <= E[cost] by construction.
inline FixSeedResult fix_seed_exact(const CostFunction& cost, const ChunkSchedule& sched) {
  const int total = cost.seed_bits();
  if (total > sched.enum_budget_bits)
    throw std::invalid_argument("fix_seed: seed space exceeds enumeration budget");
  if (sched.chunk_bits < 1) throw std::invalid_argument("fix_seed: chunk_bits must be >= 1");

  FixSeedResult res;
  res.certificate.strategy = DerandStrategy::ExactEnumeration;
  res.certificate.initial_expectation =
      conditional_cost_exact(cost, {BitString(0), total}, sched.enum_budget_bits);

  BitString prefix(0);
  while (prefix.size() < total) {
    const int width = std::min(sched.chunk_bits, total - prefix.size());
    ExactExpectation best;
    std::uint64_t best_value = 0;
    bool have = false;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << width); ++v) {
      const SeedPrefix candidate{prefix.extended(width, v), total};
      const ExactExpectation e = conditional_cost_exact(cost, candidate, sched.enum_budget_bits);
      if (!have || (e.leq(best) && !best.leq(e))) {  // strictly smaller
        best = e;
        best_value = v;
        have = true;
      }
    }
    prefix = prefix.extended(width, best_value);
    res.certificate.steps.push_back({prefix.size(), best_value, best});
  }
  res.seed = prefix;
  res.certificate.final_cost = cost.evaluate(res.seed);
  return res;
}

inline FixSeedResult fix_seed_exact(const CostFunction& cost, const ChunkSchedule& sched);
inline FixSeedResult pool_search(const CostFunction& cost, const SeedPool& pool);

inline FixSeedResult fix_seed(const CostFunction& cost, const ChunkSchedule& sched,
                              const SeedPool* pool = nullptr) {
  if (sched.strategy == DerandStrategy::ExactEnumeration) return fix_seed_exact(cost, sched);
  if (pool == nullptr) throw std::invalid_argument("fix_seed: pool strategy needs a pool spec");
  return pool_search(cost, *pool);
}

// Exact-cost argmin over a deterministic pool; ties break toward the
// lexicographically smallest seed. The certificate records the pool mean.
inline FixSeedResult pool_search(const CostFunction& cost, const SeedPool& pool) {
  if (pool.positions.empty() && pool.base.size() == 0)
    throw std::invalid_argument("pool_search: empty pool");
  FixSeedResult res;
  res.certificate.strategy = DerandStrategy::PoolSearch;
  res.certificate.pool_size = pool.size();
  bool have = false;
  std::uint64_t best_cost = 0;
  for (std::uint64_t i = 0; i < pool.size(); ++i) {
    const BitString seed = pool.member(i);
    const std::uint64_t c = cost.evaluate(seed);
    res.certificate.pool_cost_sum += c;
    if (!have || c < best_cost || (c == best_cost && seed < res.seed)) {
      best_cost = c;
      res.seed = seed;
      have = true;
    }
  }
  res.certificate.final_cost = best_cost;
  return res;
}

}  // namespace detcolor
