#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace detcolor {

// Fixed-capacity bit string used for hash seeds and seed prefixes.
//
// Bit 0 is the most significant bit of the serialized form: it is the first
// bit fixed by the conditional-expectation search, and for strings of up to
// 64 bits the whole string maps to an integer whose numeric order equals the
// lexicographic order of the bits. Prefix extension therefore corresponds to
// narrowing a contiguous integer interval, which the seed enumerators rely on.
class BitString {
 public:
  static constexpr int kMaxBits = 1024;
  static constexpr int kWords = kMaxBits / 64;

  BitString() = default;

  explicit BitString(int nbits) : nbits_(nbits) {
    if (nbits < 0 || nbits > kMaxBits) throw std::invalid_argument("BitString: bad length");
  }

  // Interprets the low `nbits` of `value` as the bit string, MSB first.
  static BitString from_uint(std::uint64_t value, int nbits) {
    if (nbits < 0 || nbits > 64) throw std::invalid_argument("BitString::from_uint: bad length");
    BitString s(nbits);
    if (nbits > 0) s.words_[0] = (nbits == 64) ? value : (value << (64 - nbits));
    return s;
  }

  int size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }

  bool bit(int i) const {
    check_index(i);
    return (words_[i / 64] >> (63 - (i % 64))) & 1u;
  }

  void set_bit(int i, bool v) {
    check_index(i);
    const std::uint64_t mask = std::uint64_t{1} << (63 - (i % 64));
    if (v)
      words_[i / 64] |= mask;
    else
      words_[i / 64] &= ~mask;
  }

  // Reads `width` (<= 64) bits starting at `offset`, MSB first.
  std::uint64_t slice(int offset, int width) const {
    if (width < 0 || width > 64 || offset < 0 || offset + width > nbits_)
      throw std::out_of_range("BitString::slice");
    std::uint64_t out = 0;
    int w = offset / 64, b = offset % 64;
    int got = 0;
    while (got < width) {
      int take = std::min(64 - b, width - got);
      std::uint64_t chunk = (words_[w] << b) >> (64 - take);
      out = (take == 64) ? chunk : ((out << take) | chunk);
      got += take;
      ++w;
      b = 0;
    }
    return out;
  }

  void set_slice(int offset, int width, std::uint64_t value) {
    if (width < 0 || width > 64 || offset < 0 || offset + width > nbits_)
      throw std::out_of_range("BitString::set_slice");
    for (int i = 0; i < width; ++i)
      set_bit(offset + i, (value >> (width - 1 - i)) & 1u);
  }

  BitString prefix(int nbits) const {
    if (nbits < 0 || nbits > nbits_) throw std::out_of_range("BitString::prefix");
    BitString p(nbits);
    for (int w = 0; w * 64 < nbits; ++w) p.words_[w] = words_[w];
    p.clear_tail();
    return p;
  }

  // Returns this prefix extended by `width` bits holding `value`.
  BitString extended(int width, std::uint64_t value) const {
    BitString e(nbits_ + width);
    e.words_ = words_;
    e.set_slice(nbits_, width, value);
    return e;
  }

  std::uint64_t as_uint() const {
    if (nbits_ > 64) throw std::logic_error("BitString::as_uint: too wide");
    if (nbits_ == 0) return 0;
    return words_[0] >> (64 - nbits_);
  }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    const int nibbles = (nbits_ + 3) / 4;
    for (int i = 0; i < nibbles; ++i) {
      std::uint64_t nib = 0;
      for (int b = 0; b < 4; ++b) {
        int idx = i * 4 + b;
        nib = (nib << 1) | (idx < nbits_ ? bit(idx) : 0);
      }
      out.push_back(digits[nib]);
    }
    return out.empty() ? "0" : out;
  }

  friend bool operator==(const BitString& a, const BitString& b) {
    if (a.nbits_ != b.nbits_) return false;
    for (int w = 0; w * 64 < a.nbits_; ++w)
      if (a.words_[w] != b.words_[w]) return false;
    return true;
  }

  // Lexicographic on bits; shorter strings compare by their padded prefix.
  friend bool operator<(const BitString& a, const BitString& b) {
    const int words = (std::max(a.nbits_, b.nbits_) + 63) / 64;
    for (int w = 0; w < words; ++w) {
      if (a.words_[w] != b.words_[w]) return a.words_[w] < b.words_[w];
    }
    return a.nbits_ < b.nbits_;
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= nbits_) throw std::out_of_range("BitString: bit index");
  }
  void clear_tail() {
    if (nbits_ % 64) {
      words_[nbits_ / 64] &= ~std::uint64_t{0} << (64 - nbits_ % 64);
    }
    for (int w = (nbits_ + 63) / 64; w < kWords; ++w) words_[w] = 0;
  }

  std::array<std::uint64_t, kWords> words_{};
  int nbits_ = 0;
};

}  // namespace detcolor
