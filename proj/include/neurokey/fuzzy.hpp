#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "neurokey/gf.hpp"

namespace neurokey::fuzzy {

struct BchSpec {
  unsigned n = 0;
  unsigned k = 0;
  unsigned t = 0;
  friend bool operator==(const BchSpec&, const BchSpec&) = default;
};

// Narrow-sense binary BCH code over GF(2^m), n = 2^m - 1. Supported
// parameter sets: (15,7,2), (31,16,3), (127,64,10).
class BchCode {
 public:
  explicit BchCode(BchSpec spec);

  const BchSpec& spec() const { return spec_; }
  unsigned n() const { return spec_.n; }
  unsigned k() const { return spec_.k; }
  unsigned t() const { return spec_.t; }
  const gf::Gf2m& field() const { return field_; }
  // g(x) as a bit polynomial, bit i = coefficient of x^i; degree n-k <= 63.
  uint64_t generator_poly() const { return generator_; }

 private:
  BchSpec spec_;
  gf::Gf2m field_;
  uint64_t generator_ = 0;
};

BchCode make_code(BchSpec spec);

// Thermometer-coded quantizer output: exactly `level` leading ones.
struct QuantizedFeature {
  std::vector<uint8_t> bits;  // length n, values 0/1; bit j = coeff of x^j
  unsigned level = 0;
};

// 2t elements of GF(2^m): { w(alpha^1), ..., w(alpha^2t) }.
using Syndrome = std::vector<uint8_t>;

struct UniversalHashKey {
  gf::Gf127 key;             // nonzero
  unsigned output_bits = 0;  // l
};

struct FeatureRandomness {
  std::vector<uint8_t> bits;  // length l, values 0/1, most significant first
};

QuantizedFeature quantize(double w_component, std::pair<double, double> bounds,
                          const BchCode& code);

Syndrome syndrome(const QuantizedFeature& q, const BchCode& code);

// Recovers the enrolled word from a noisy re-reading within Hamming
// distance t, via the difference syndrome, Berlekamp-Massey and Chien
// search. Throws IrrecoverableError when the reading is too far off.
QuantizedFeature reproduce(const QuantizedFeature& q_noisy,
                           const Syndrome& stored, const BchCode& code);

// r = most-significant l bits of key * word in GF(2^127); the word is the
// bit polynomial zero-padded to 127 bits.
FeatureRandomness extract_randomness(const QuantizedFeature& q,
                                     const UniversalHashKey& hkey);

}  // namespace neurokey::fuzzy
