#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "detcolor/generate.hpp"
#include "detcolor/hash_family.hpp"
#include "doctest.h"

using namespace detcolor;

namespace {

// Rabin's irreducibility test over GF(2), independent of Gf2Field: f of
// degree n is irreducible iff x^(2^n) == x (mod f) and for every prime q | n,
// gcd(x^(2^(n/q)) - x, f) = 1.
using Poly = unsigned __int128;

int poly_deg(Poly p) {
  int d = -1;
  while (p) {
    ++d;
    p >>= 1;
  }
  return d;
}

Poly poly_mod(Poly a, Poly f) {
  const int df = poly_deg(f);
  while (poly_deg(a) >= df) a ^= f << (poly_deg(a) - df);
  return a;
}

Poly poly_mulmod(Poly a, Poly b, Poly f) {
  Poly r = 0;
  while (b) {
    if (b & 1) r ^= a;
    a <<= 1;
    b >>= 1;
  }
  return poly_mod(r, f);
}

Poly poly_gcd(Poly a, Poly b) {
  while (b) {
    Poly t = poly_mod(a, b);
    a = b;
    b = t;
  }
  return a;
}

bool rabin_irreducible(std::uint64_t f) {
  const int n = poly_deg(f);
  auto x_pow_2k = [&](int k) {
    Poly x = 2;
    for (int i = 0; i < k; ++i) x = poly_mulmod(x, x, f);
    return x;
  };
  if (x_pow_2k(n) != 2) return false;
  for (int q = 2; q <= n; ++q) {
    if (n % q) continue;
    bool prime = true;
    for (int d = 2; d * d <= q; ++d)
      if (q % d == 0) prime = false;
    if (!prime) continue;
    const Poly h = x_pow_2k(n / q) ^ 2;
    if (h == 0 || poly_gcd(f, h) != 1) return false;
  }
  return true;
}

BitString seed_from_coeffs(const HashFamilyParams& p, std::vector<std::uint64_t> coeffs) {
  // coeffs given as (a_{c-1}, ..., a_0), matching the serialized order
  BitString s(p.seed_bits());
  for (int j = 0; j < p.independence; ++j) s.set_slice(j * p.field_bits, p.field_bits, coeffs[j]);
  return s;
}

}  // namespace

TEST_CASE("modulus table entries are irreducible of the right degree") {
  for (int b = Gf2Field::kMinBits; b <= Gf2Field::kMaxBits; ++b) {
    const std::uint64_t f = Gf2Field::kModulus[b];
    CAPTURE(b);
    CHECK(poly_deg(f) == b);
    CHECK(rabin_irreducible(f));
  }
}

TEST_CASE("GF(4) arithmetic matches the multiplication table") {
  // modulus x^2 + x + 1
  Gf2Field f(2);
  CHECK(f.modulus() == 0x7);
  const std::array<std::array<std::uint64_t, 4>, 4> table = {{
      {0, 0, 0, 0},
      {0, 1, 2, 3},
      {0, 2, 3, 1},
      {0, 3, 1, 2},
  }};
  for (std::uint64_t a = 0; a < 4; ++a)
    for (std::uint64_t b = 0; b < 4; ++b) {
      CHECK(f.mul(a, b) == table[a][b]);
      CHECK(f.add(a, b) == (a ^ b));
    }
}

TEST_CASE("evaluate: identity, constant, and GF(4) polynomials") {
  SUBCASE("identity polynomial") {
    HashFamilyParams p{4, 4, 2};
    const BitString seed = seed_from_coeffs(p, {1, 0});  // h(x) = x
    for (std::uint64_t x = 0; x < 16; ++x) CHECK(hash_evaluate(p, seed, x) == x);
    CHECK(hash_evaluate(p, seed, 5) == 5);
  }
  SUBCASE("constant polynomial") {
    HashFamilyParams p{2, 2, 2};
    const BitString seed = seed_from_coeffs(p, {0, 3});  // h(x) = 3
    for (std::uint64_t x = 0; x < 4; ++x) CHECK(hash_evaluate(p, seed, x) == 3);
  }
  SUBCASE("degree-1 polynomial in GF(4)") {
    HashFamilyParams p{2, 2, 2};
    const BitString seed = seed_from_coeffs(p, {2, 1});  // h(x) = 2x + 1
    CHECK(hash_evaluate(p, seed, 3) == 0);               // 2*3 = 1, 1 xor 1 = 0
  }
  SUBCASE("domain violations") {
    HashFamilyParams p{2, 2, 2};
    const BitString seed = seed_from_coeffs(p, {1, 0});
    CHECK_THROWS(hash_evaluate(p, seed, 4));
    CHECK_THROWS(HashFamilyParams{4, 2, 2}.validate());  // 2^b < 2^a
  }
}

TEST_CASE("evaluate_range: floor mapping and bucket balance") {
  HashFamilyParams p{4, 4, 2};
  const BitString identity = seed_from_coeffs(p, {1, 0});

  SUBCASE("worked values at b=4, r=3") {
    CHECK(hash_evaluate_range(p, identity, 5, {3}) == 0);    // 15/16 < 1
    CHECK(hash_evaluate_range(p, identity, 11, {3}) == 2);   // 33/16 >= 2
    CHECK(hash_evaluate_range(p, identity, 9, {16}) == 9);   // identity when r = 2^b
    // bucket sizes over all h: 6, 5, 5
    std::array<int, 3> buckets{};
    for (std::uint64_t h = 0; h < 16; ++h) ++buckets[(h * 3) >> 4];
    CHECK(buckets == std::array<int, 3>{6, 5, 5});
  }

  SUBCASE("preimage sizes differ by at most one, all r, exhaustive") {
    for (int b = 2; b <= 8; ++b) {
      for (std::uint64_t r = 1; r <= (std::uint64_t{1} << b); ++r) {
        std::vector<std::uint64_t> buckets(r, 0);
        for (std::uint64_t h = 0; h < (std::uint64_t{1} << b); ++h) ++buckets[(h * r) >> b];
        std::uint64_t lo = buckets[0], hi = buckets[0];
        for (std::uint64_t cnt : buckets) {
          lo = std::min(lo, cnt);
          hi = std::max(hi, cnt);
        }
        CAPTURE(b);
        CAPTURE(r);
        CHECK(hi - lo <= 1);
      }
    }
  }
}

TEST_CASE("independence census at small parameters") {
  SUBCASE("pair census is the uniform product") {
    HashFamilyParams p{2, 2, 2};
    const std::vector<std::uint64_t> inputs{0, 1};
    const CensusResult res = independence_census(p, inputs);
    CHECK(res.counts.size() == 16);
    CHECK(res.uniform());
    for (std::uint64_t c : res.counts) CHECK(c == 1);  // 16 seeds, 16 output pairs
  }
  SUBCASE("single input is uniform") {
    HashFamilyParams p{2, 2, 2};
    const std::vector<std::uint64_t> inputs{1};
    const CensusResult res = independence_census(p, inputs);
    CHECK(res.uniform());
    for (std::uint64_t c : res.counts) CHECK(c == 4);
  }
  SUBCASE("c=1 family is constant: pairs fully correlated") {
    HashFamilyParams p{2, 2, 1};
    const std::vector<std::uint64_t> inputs{0, 1};
    const CensusResult res = independence_census(p, inputs);
    CHECK_FALSE(res.uniform());
    for (std::uint64_t y = 0; y < 4; ++y) CHECK(res.cell(std::array<std::uint64_t, 2>{y, y}) == 1);
    CHECK(res.cell(std::array<std::uint64_t, 2>{0, 1}) == 0);
  }
  SUBCASE("budget guard") {
    HashFamilyParams p{8, 8, 4};  // 32-bit seed space
    const std::vector<std::uint64_t> inputs{0, 1};
    CHECK_THROWS(independence_census(p, inputs));
  }
}

TEST_CASE("census confirms exact c-wise uniformity for random tuples") {
  Rng rng(42);  // deterministic tuple picks
  struct Case {
    int a, b, c;
  };
  for (const Case cs : {Case{3, 3, 2}, Case{2, 2, 3}, Case{4, 4, 3}, Case{3, 3, 4}}) {
    HashFamilyParams p{cs.a, cs.b, cs.c};
    for (int trial = 0; trial < 4; ++trial) {
      // choose t <= c distinct inputs
      const int t = 1 + static_cast<int>(rng.next() % cs.c);
      std::vector<std::uint64_t> inputs;
      while (static_cast<int>(inputs.size()) < t) {
        const std::uint64_t x = rng.next() % (std::uint64_t{1} << cs.a);
        bool dup = false;
        for (std::uint64_t y : inputs) dup |= x == y;
        if (!dup && t <= (1 << cs.a)) inputs.push_back(x);
        if (t > (1 << cs.a)) break;
      }
      if (static_cast<int>(inputs.size()) < t) continue;
      const CensusResult res = independence_census(p, inputs);
      CAPTURE(cs.a);
      CAPTURE(cs.c);
      CHECK(res.uniform());
    }
  }
}

TEST_CASE("range-reduced outputs stay exactly independent") {
  // After interval reduction the pair distribution need not be uniform, but
  // it must factor exactly: count(x,y) * seeds == count(x) * count(y).
  HashFamilyParams p{3, 3, 2};
  const std::uint64_t seeds = std::uint64_t{1} << p.seed_bits();
  for (const std::uint64_t r : {3ull, 5ull, 6ull}) {
    for (const auto& [x1, x2] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{
             {0, 1}, {2, 7}, {3, 4}}) {
      std::vector<std::uint64_t> joint(r * r, 0), m1(r, 0), m2(r, 0);
      for (std::uint64_t s = 0; s < seeds; ++s) {
        const BitString seed = BitString::from_uint(s, p.seed_bits());
        const std::uint64_t y1 = hash_evaluate_range(p, seed, x1, {r});
        const std::uint64_t y2 = hash_evaluate_range(p, seed, x2, {r});
        ++joint[y1 * r + y2];
        ++m1[y1];
        ++m2[y2];
      }
      bool uniform = true;
      for (std::uint64_t a = 0; a < r; ++a) {
        if (m1[a] != seeds / r) uniform = false;
        for (std::uint64_t b = 0; b < r; ++b)
          CHECK(joint[a * r + b] * seeds == m1[a] * m2[b]);
      }
      if (r == 3 || r == 5 || r == 6) CHECK_FALSE(uniform);  // 8 is not divisible by r
    }
  }
}

TEST_CASE("enumerated tail probabilities respect the moment bound") {
  // Z = sum of t indicators [h(x_i) < 2^(b-1)] over a c=4 family; the exact
  // tail P(|Z - mu| >= lambda) must stay below 2 (c t / lambda^2)^(c/2).
  HashFamilyParams p{4, 4, 4};
  const int t = 16;
  const double mu = t / 2.0;
  std::vector<std::uint64_t> tail_ge(t + 1, 0);  // tail_ge[l] = #seeds with |Z-mu| >= l
  const std::uint64_t seeds = std::uint64_t{1} << p.seed_bits();
  for (std::uint64_t s = 0; s < seeds; ++s) {
    const BitString seed = BitString::from_uint(s, p.seed_bits());
    int z = 0;
    for (std::uint64_t x = 0; x < static_cast<std::uint64_t>(t); ++x)
      z += hash_evaluate(p, seed, x) < 8;
    const double dev = std::fabs(z - mu);
    for (int l = 0; l <= t; ++l)
      if (dev >= l) ++tail_ge[l];
  }
  for (int l = 1; l <= t; ++l) {
    const double exact = static_cast<double>(tail_ge[l]) / static_cast<double>(seeds);
    const double bound = 2.0 * std::pow(4.0 * t / (static_cast<double>(l) * l), 2.0);
    CAPTURE(l);
    CHECK(exact <= bound);
  }
}
