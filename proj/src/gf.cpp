#include "neurokey/gf.hpp"

#include "neurokey/errors.hpp"

namespace neurokey::gf {

Gf2m::Gf2m(unsigned m, unsigned primitive_poly) : m_(m), n_((1u << m) - 1) {
  if (m < 2 || m > 7) throw ArgumentError("Gf2m: m must be in [2,7]");
  constexpr uint8_t kUnset = 0xFF;
  log_.assign(n_ + 1, kUnset);
  alog_.assign(2 * n_, 0);
  unsigned b = 1;
  for (unsigned i = 0; i < n_; ++i) {
    // A shorter cycle revisits a value before all 2^m - 1 are covered.
    if (log_[b] != kUnset) throw ArgumentError("Gf2m: polynomial is not primitive");
    alog_[i] = static_cast<uint8_t>(b);
    alog_[i + n_] = static_cast<uint8_t>(b);
    log_[b] = static_cast<uint8_t>(i);
    b <<= 1;
    if (b & (1u << m)) b = (b ^ primitive_poly) & n_;
  }
  if (b != 1) throw ArgumentError("Gf2m: polynomial is not primitive");
}

uint8_t Gf2m::mul(uint8_t a, uint8_t b) const {
  if (a == 0 || b == 0) return 0;
  return alog_[log_[a] + log_[b]];
}

uint8_t Gf2m::div(uint8_t a, uint8_t b) const {
  if (b == 0) throw ArgumentError("Gf2m: division by zero");
  if (a == 0) return 0;
  return alog_[log_[a] + n_ - log_[b]];
}

uint8_t Gf2m::inv(uint8_t a) const {
  if (a == 0) throw ArgumentError("Gf2m: zero has no inverse");
  return alog_[n_ - log_[a]];
}

uint8_t Gf2m::alpha_pow(uint64_t e) const { return alog_[e % n_]; }

unsigned Gf2m::log(uint8_t a) const {
  if (a == 0) throw ArgumentError("Gf2m: log of zero");
  return log_[a];
}

Gf127 gf127_add(Gf127 a, Gf127 b) { return {a.lo ^ b.lo, a.hi ^ b.hi}; }

namespace {

// Carry-less 64x64 -> 128 multiply.
void clmul64(uint64_t a, uint64_t b, uint64_t& lo, uint64_t& hi) {
  lo = 0;
  hi = 0;
  for (int i = 0; i < 64; ++i) {
    if ((b >> i) & 1) {
      lo ^= a << i;
      if (i > 0) hi ^= a >> (64 - i);
    }
  }
}

}  // namespace

Gf127 gf127_mul(Gf127 a, Gf127 b) {
  // Schoolbook product of (a.hi:a.lo) x (b.hi:b.lo): 254-bit result in p[0..3].
  uint64_t p0, p1, p2, p3, lo, hi;
  clmul64(a.lo, b.lo, p0, p1);
  clmul64(a.hi, b.hi, p2, p3);
  clmul64(a.lo, b.hi, lo, hi);
  p1 ^= lo;
  p2 ^= hi;
  clmul64(a.hi, b.lo, lo, hi);
  p1 ^= lo;
  p2 ^= hi;

  // Reduce modulo x^127 + x + 1: x^(127+j) = x^(j+1) + x^j. Fold the bits at
  // positions >= 127 (value H) back in as H + H<<1; a second, strictly smaller
  // fold handles the carries the first one pushes past bit 126.
  uint64_t r_lo = p0;
  uint64_t r_hi = p1 & 0x7FFFFFFFFFFFFFFFull;
  uint64_t h_lo = (p1 >> 63) | (p2 << 1);
  uint64_t h_hi = (p2 >> 63) | (p3 << 1);
  for (int fold = 0; fold < 2; ++fold) {
    uint64_t s_lo = (h_lo << 1);
    uint64_t s_hi = (h_hi << 1) | (h_lo >> 63);
    r_lo ^= h_lo ^ s_lo;
    r_hi ^= h_hi ^ s_hi;
    h_lo = r_hi >> 63;
    h_hi = 0;
    r_hi &= 0x7FFFFFFFFFFFFFFFull;
  }
  return {r_lo, r_hi};
}

}  // namespace neurokey::gf
