#pragma once

#include <cstdint>
#include <stdexcept>

namespace detcolor {

// Arithmetic in GF(2^b) for b in [2, 32], with one fixed irreducible modulus
// per field size: the lexicographically smallest irreducible polynomial of
// each degree. Elements are polynomials over GF(2) packed into integers
// (bit i = coefficient of x^i). Addition is xor; multiplication is a
// carry-less product followed by reduction.
class Gf2Field {
 public:
  static constexpr int kMinBits = 2;
  static constexpr int kMaxBits = 32;

  explicit Gf2Field(int bits) : bits_(bits) {
    if (bits < kMinBits || bits > kMaxBits)
      throw std::invalid_argument("Gf2Field: field_bits must be in [2,32]");
    modulus_ = kModulus[bits];
  }

  int bits() const { return bits_; }
  std::uint64_t order() const { return std::uint64_t{1} << bits_; }
  std::uint64_t modulus() const { return modulus_; }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return a ^ b; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    // Carry-less multiply: partial products fit 64 bits for b <= 32.
    std::uint64_t prod = 0;
    while (b) {
      if (b & 1) prod ^= a;
      a <<= 1;
      b >>= 1;
    }
    return reduce(prod);
  }

  // Reduces a polynomial of degree < 2b modulo the field polynomial.
  std::uint64_t reduce(std::uint64_t p) const {
    for (int d = 2 * bits_ - 2; d >= bits_; --d) {
      if (p >> d & 1) p ^= modulus_ << (d - bits_);
    }
    return p;
  }

  // Smallest irreducible polynomial of each degree, leading bit included.
  // Entry [b] has degree b; index 0 and 1 unused.
  static constexpr std::uint64_t kModulus[kMaxBits + 1] = {
      0,           0,           0x7,         0xB,         0x13,
      0x25,        0x43,        0x83,        0x11B,       0x203,
      0x409,       0x805,       0x1009,      0x201B,      0x4021,
      0x8003,      0x1002B,     0x20009,     0x40009,     0x80027,
      0x100009,    0x200005,    0x400003,    0x800021,    0x100001B,
      0x2000009,   0x400001B,   0x8000027,   0x10000003,  0x20000005,
      0x40000003,  0x80000009,  0x10000008D,
  };

 private:
  int bits_;
  std::uint64_t modulus_;
};

}  // namespace detcolor
