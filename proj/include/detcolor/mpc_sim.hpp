#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "detcolor/validation.hpp"

namespace detcolor {

enum class SimMode { CongestedClique, LinearMpc, LowSpaceMpc };

inline const char* to_string(SimMode m) {
  switch (m) {
    case SimMode::CongestedClique: return "congc";
    case SimMode::LinearMpc: return "linear-mpc";
    case SimMode::LowSpaceMpc: return "low-space-mpc";
  }
  return "?";
}

inline SimMode sim_mode_from_string(const std::string& s) {
  if (s == "congc") return SimMode::CongestedClique;
  if (s == "linear-mpc") return SimMode::LinearMpc;
  if (s == "low-space-mpc") return SimMode::LowSpaceMpc;
  throw std::invalid_argument("unknown mode: " + s);
}

enum class Primitive { Sort, PrefixSum, Broadcast, Route, LocalStep, Barrier };
constexpr int kPrimitiveCount = 6;

inline const char* to_string(Primitive p) {
  switch (p) {
    case Primitive::Sort: return "sort";
    case Primitive::PrefixSum: return "prefix_sum";
    case Primitive::Broadcast: return "broadcast";
    case Primitive::Route: return "route";
    case Primitive::LocalStep: return "local_step";
    case Primitive::Barrier: return "barrier";
  }
  return "?";
}

// Rounds charged per communication primitive. Every primitive costs one
// simulated round by default (local computation is free), keeping regression
// constants sharp; the table is configurable for sensitivity runs.
struct CostTable {
  std::array<std::uint64_t, kPrimitiveCount> rounds{1, 1, 1, 1, 0, 1};

  std::uint64_t cost(Primitive p) const { return rounds[static_cast<int>(p)]; }
  void set(Primitive p, std::uint64_t r) { rounds[static_cast<int>(p)] = r; }
};

// Declared machine model: mode, per-machine space S in words, machine count.
struct SimConfig {
  SimMode mode = SimMode::LinearMpc;
  std::uint64_t local_space_words = 0;  // S
  std::uint64_t machine_count = 0;      // M
  std::uint64_t lenzen_bound_words = 0; // congc per-round traffic cap (0 = derived)
  CostTable cost_table;

  static SimConfig congested_clique(std::uint32_t n, std::uint64_t space_factor) {
    SimConfig c;
    c.mode = SimMode::CongestedClique;
    c.local_space_words = space_factor * n;
    c.machine_count = n;
    c.lenzen_bound_words = space_factor * static_cast<std::uint64_t>(n);
    return c;
  }

  static SimConfig linear_mpc(std::uint32_t n, std::uint64_t space_factor,
                              std::uint64_t input_words) {
    SimConfig c;
    c.mode = SimMode::LinearMpc;
    c.local_space_words = space_factor * n;
    c.machine_count = (input_words + c.local_space_words - 1) / c.local_space_words + 1;
    return c;
  }

  static SimConfig low_space_mpc(std::uint32_t n, double eps, std::uint64_t input_words) {
    SimConfig c;
    c.mode = SimMode::LowSpaceMpc;
    c.local_space_words =
        static_cast<std::uint64_t>(std::pow(static_cast<double>(n), eps)) + 1;
    c.machine_count = (input_words + c.local_space_words - 1) / c.local_space_words + 1;
    return c;
  }

  ValidationReport validate(std::uint64_t input_words) const {
    ValidationReport report;
    if (local_space_words == 0) report.add("sim-config", "local space is zero");
    if (machine_count * local_space_words < input_words)
      report.add("sim-config", "total space " + std::to_string(machine_count * local_space_words) +
                                   " below input size " + std::to_string(input_words));
    return report;
  }
};

enum class Phase { Partition, Derandomize, Collect, Mis };
constexpr int kPhaseCount = 4;

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::Partition: return "partition";
    case Phase::Derandomize: return "derandomize";
    case Phase::Collect: return "collect";
    case Phase::Mis: return "mis";
  }
  return "?";
}

// Simulated execution costs: rounds and message volume per phase, plus
// storage and per-round traffic high-water marks. The MIS phase is counted
// separately because its round cost is solver-reported (parametric), not
// derived from the cost table.
class CostLedger {
 public:
  void charge(Phase phase, Primitive prim, std::uint64_t volume_words,
              std::uint64_t per_machine_peak_words, const CostTable& table) {
    auto& ph = phases_[static_cast<int>(phase)];
    ph.rounds += table.cost(prim);
    ph.messages += volume_words;
    ph.peak_traffic = std::max(ph.peak_traffic, per_machine_peak_words);
  }

  void charge_mis_rounds(std::uint64_t rounds) { mis_parametric_rounds_ += rounds; }

  void observe_machine_words(Phase phase, std::uint64_t words) {
    auto& ph = phases_[static_cast<int>(phase)];
    ph.peak_storage = std::max(ph.peak_storage, words);
  }

  void observe_global_words(std::uint64_t words) {
    global_high_water_ = std::max(global_high_water_, words);
  }

  std::uint64_t rounds() const {
    std::uint64_t total = 0;
    for (const auto& ph : phases_) total += ph.rounds;
    return total;
  }

  std::uint64_t rounds_in(Phase phase) const { return phases_[static_cast<int>(phase)].rounds; }
  std::uint64_t mis_parametric_rounds() const { return mis_parametric_rounds_; }

  std::uint64_t total_messages() const {
    std::uint64_t total = 0;
    for (const auto& ph : phases_) total += ph.messages;
    return total;
  }

  std::uint64_t max_machine_words() const {
    std::uint64_t peak = 0;
    for (const auto& ph : phases_) peak = std::max({peak, ph.peak_storage, ph.peak_traffic});
    return peak;
  }

  std::uint64_t peak_storage(Phase phase) const {
    return phases_[static_cast<int>(phase)].peak_storage;
  }
  std::uint64_t peak_traffic(Phase phase) const {
    return phases_[static_cast<int>(phase)].peak_traffic;
  }

  std::uint64_t global_high_water() const { return global_high_water_; }

  // Parallel composition: phase-wise max of rounds, sum of messages, max of
  // space marks. Associative and commutative.
  static CostLedger merge_parallel(std::span<const CostLedger> branches) {
    CostLedger out;
    for (const auto& b : branches) {
      for (int i = 0; i < kPhaseCount; ++i) {
        out.phases_[i].rounds = std::max(out.phases_[i].rounds, b.phases_[i].rounds);
        out.phases_[i].messages += b.phases_[i].messages;
        out.phases_[i].peak_storage = std::max(out.phases_[i].peak_storage, b.phases_[i].peak_storage);
        out.phases_[i].peak_traffic = std::max(out.phases_[i].peak_traffic, b.phases_[i].peak_traffic);
      }
      out.mis_parametric_rounds_ = std::max(out.mis_parametric_rounds_, b.mis_parametric_rounds_);
      out.global_high_water_ = std::max(out.global_high_water_, b.global_high_water_);
    }
    return out;
  }

  // Sequential composition: everything accumulates; space marks max.
  void append_sequential(const CostLedger& next) {
    for (int i = 0; i < kPhaseCount; ++i) {
      phases_[i].rounds += next.phases_[i].rounds;
      phases_[i].messages += next.phases_[i].messages;
      phases_[i].peak_storage = std::max(phases_[i].peak_storage, next.phases_[i].peak_storage);
      phases_[i].peak_traffic = std::max(phases_[i].peak_traffic, next.phases_[i].peak_traffic);
    }
    mis_parametric_rounds_ += next.mis_parametric_rounds_;
    global_high_water_ = std::max(global_high_water_, next.global_high_water_);
  }

  friend bool operator==(const CostLedger& a, const CostLedger& b) {
    for (int i = 0; i < kPhaseCount; ++i)
      if (a.phases_[i].rounds != b.phases_[i].rounds ||
          a.phases_[i].messages != b.phases_[i].messages ||
          a.phases_[i].peak_storage != b.phases_[i].peak_storage ||
          a.phases_[i].peak_traffic != b.phases_[i].peak_traffic)
        return false;
    return a.mis_parametric_rounds_ == b.mis_parametric_rounds_ &&
           a.global_high_water_ == b.global_high_water_;
  }

 private:
  struct PhaseCost {
    std::uint64_t rounds = 0;
    std::uint64_t messages = 0;
    std::uint64_t peak_storage = 0;
    std::uint64_t peak_traffic = 0;
  };
  std::array<PhaseCost, kPhaseCount> phases_{};
  std::uint64_t mis_parametric_rounds_ = 0;
  std::uint64_t global_high_water_ = 0;
};

// Space-violation scan: per-machine storage or traffic above S in any phase,
// and in congc mode per-round traffic above the routing bound.
inline ValidationReport enforce_space(const CostLedger& ledger, const SimConfig& config) {
  ValidationReport report;
  for (int i = 0; i < kPhaseCount; ++i) {
    const Phase phase = static_cast<Phase>(i);
    if (ledger.peak_storage(phase) > config.local_space_words)
      report.add("space-exceeded", std::string(to_string(phase)) + ": " +
                                       std::to_string(ledger.peak_storage(phase)) + " words > S=" +
                                       std::to_string(config.local_space_words));
    if (ledger.peak_traffic(phase) > config.local_space_words)
      report.add("traffic-exceeded", std::string(to_string(phase)) + ": " +
                                         std::to_string(ledger.peak_traffic(phase)) +
                                         " words > S=" + std::to_string(config.local_space_words));
    if (config.mode == SimMode::CongestedClique && config.lenzen_bound_words > 0 &&
        ledger.peak_traffic(phase) > config.lenzen_bound_words)
      report.add("lenzen-bound", std::string(to_string(phase)) + ": per-round traffic " +
                                     std::to_string(ledger.peak_traffic(phase)) + " words > " +
                                     std::to_string(config.lenzen_bound_words));
  }
  return report;
}

}  // namespace detcolor
