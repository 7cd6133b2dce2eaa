#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "detcolor/bits.hpp"
#include "detcolor/gf2.hpp"

namespace detcolor {

// A c-wise independent hash family realized as polynomials of degree c-1
// over GF(2^b). A member is identified by its coefficient vector
// (a_{c-1}, ..., a_0); the seed serializes coefficients from a_{c-1} down to
// a_0, most significant bits first. Inputs are field elements below 2^a.
// For any c distinct inputs, the outputs under a uniformly random seed are
// independent and uniform over the field.
struct HashFamilyParams {
  int domain_bits = 0;   // a: inputs are below 2^a
  int field_bits = 0;    // b: outputs live in GF(2^b)
  int independence = 0;  // c: polynomial degree is c-1

  int seed_bits() const { return independence * field_bits; }

  void validate() const {
    if (field_bits < Gf2Field::kMinBits || field_bits > Gf2Field::kMaxBits)
      throw std::invalid_argument("hash family: field_bits out of [2,32]");
    if (domain_bits < 1 || domain_bits > field_bits)
      throw std::invalid_argument("hash family: need 2^b >= 2^a");
    if (independence < 1)
      throw std::invalid_argument("hash family: independence must be >= 1");
    if (field_bits < 64 &&
        static_cast<std::uint64_t>(independence) > (std::uint64_t{1} << field_bits))
      throw std::invalid_argument("hash family: independence exceeds field order");
  }
};

// Maps a field element into [0, range) by interval: floor(h * range / 2^b).
// Preimage sizes of any two outputs differ by at most one, and outputs of up
// to c distinct inputs stay exactly c-wise independent (though no longer
// exactly uniform unless range divides 2^b).
struct RangeSpec {
  std::uint64_t range = 1;

  void validate(int field_bits) const {
    if (range < 1 || range > (std::uint64_t{1} << field_bits))
      throw std::invalid_argument("range spec: need 1 <= r <= 2^b");
  }
};

inline std::uint64_t hash_evaluate(const HashFamilyParams& params, const BitString& seed,
                                   std::uint64_t x) {
  params.validate();
  if (seed.size() != params.seed_bits())
    throw std::invalid_argument("hash evaluate: seed length mismatch");
  if (x >> params.domain_bits)
    throw std::out_of_range("hash evaluate: input outside domain");
  Gf2Field field(params.field_bits);
  // Horner over coefficients a_{c-1}..a_0, which is exactly seed order.
  std::uint64_t acc = 0;
  for (int j = 0; j < params.independence; ++j) {
    const std::uint64_t coeff = seed.slice(j * params.field_bits, params.field_bits);
    acc = field.add(field.mul(acc, x), coeff);
  }
  return acc;
}

inline std::uint64_t hash_evaluate_range(const HashFamilyParams& params, const BitString& seed,
                                         std::uint64_t x, RangeSpec range) {
  range.validate(params.field_bits);
  const std::uint64_t h = hash_evaluate(params, seed, x);
  // h < 2^b and r <= 2^b with b <= 32, so the product fits 64 bits.
  return (h * range.range) >> params.field_bits;
}

// Exact joint output distribution of a tuple of inputs over every seed of
// the family. This is the enumeration oracle behind the independence tests:
// for up to c distinct inputs the table must be the uniform product
// distribution, i.e. every cell equals 2^(c*b) / 2^(t*b).
struct CensusResult {
  int field_bits = 0;
  int tuple_size = 0;
  std::vector<std::uint64_t> counts;  // size 2^(b*t), row-major in input order

  std::uint64_t cell(std::span<const std::uint64_t> outputs) const {
    std::uint64_t idx = 0;
    for (std::uint64_t y : outputs) idx = (idx << field_bits) | y;
    return counts[idx];
  }

  bool uniform() const {
    for (std::uint64_t c : counts)
      if (c != counts[0]) return false;
    return true;
  }
};

inline CensusResult independence_census(const HashFamilyParams& params,
                                        std::span<const std::uint64_t> inputs,
                                        int budget_bits = 24) {
  params.validate();
  if (params.seed_bits() > budget_bits)
    throw std::invalid_argument("independence census: seed space exceeds enumeration budget");
  const int t = static_cast<int>(inputs.size());
  if (t < 1 || t * params.field_bits > 30)
    throw std::invalid_argument("independence census: tuple too wide to tabulate");
  for (std::uint64_t x : inputs)
    if (x >> params.domain_bits) throw std::out_of_range("independence census: input outside domain");

  CensusResult res;
  res.field_bits = params.field_bits;
  res.tuple_size = t;
  res.counts.assign(std::uint64_t{1} << (t * params.field_bits), 0);

  const std::uint64_t seeds = std::uint64_t{1} << params.seed_bits();
  for (std::uint64_t s = 0; s < seeds; ++s) {
    const BitString seed = BitString::from_uint(s, params.seed_bits());
    std::uint64_t idx = 0;
    for (std::uint64_t x : inputs)
      idx = (idx << params.field_bits) | hash_evaluate(params, seed, x);
    ++res.counts[idx];
  }
  return res;
}

}  // namespace detcolor
