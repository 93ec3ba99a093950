#pragma once

#include <cstdint>
#include <vector>

namespace neurokey::gf {

// GF(2^m) for m <= 7, log/antilog table arithmetic. Elements fit in a byte;
// alpha (= the class of x) is a primitive element of the given polynomial.
class Gf2m {
 public:
  Gf2m(unsigned m, unsigned primitive_poly);

  unsigned m() const { return m_; }
  unsigned order() const { return n_; }  // multiplicative order = 2^m - 1

  uint8_t mul(uint8_t a, uint8_t b) const;
  uint8_t div(uint8_t a, uint8_t b) const;
  uint8_t inv(uint8_t a) const;
  // alpha^e with e reduced mod 2^m - 1 (e may exceed the order).
  uint8_t alpha_pow(uint64_t e) const;
  unsigned log(uint8_t a) const;

 private:
  unsigned m_;
  unsigned n_;
  std::vector<uint8_t> log_;
  std::vector<uint8_t> alog_;
};

// Element of GF(2^127) modulo x^127 + x + 1. Bit i of (hi:lo) is the
// coefficient of x^i; bit 127 is always clear.
struct Gf127 {
  uint64_t lo = 0;
  uint64_t hi = 0;

  bool is_zero() const { return lo == 0 && hi == 0; }
  friend bool operator==(const Gf127&, const Gf127&) = default;
};

Gf127 gf127_add(Gf127 a, Gf127 b);
Gf127 gf127_mul(Gf127 a, Gf127 b);

// Coefficient of x^i.
inline int gf127_bit(const Gf127& a, unsigned i) {
  return i < 64 ? int((a.lo >> i) & 1) : int((a.hi >> (i - 64)) & 1);
}
inline void gf127_set_bit(Gf127& a, unsigned i) {
  if (i < 64) a.lo |= uint64_t(1) << i;
  else a.hi |= uint64_t(1) << (i - 64);
}

}  // namespace neurokey::gf
