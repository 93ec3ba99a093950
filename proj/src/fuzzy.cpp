#include "neurokey/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "neurokey/errors.hpp"

namespace neurokey::fuzzy {

namespace {

struct FieldParams {
  unsigned m;
  unsigned primitive_poly;
};

FieldParams field_for(const BchSpec& spec) {
  if (spec.n == 15 && spec.k == 7 && spec.t == 2) return {4, 0b10011};     // x^4+x+1
  if (spec.n == 31 && spec.k == 16 && spec.t == 3) return {5, 0b100101};   // x^5+x^2+1
  if (spec.n == 127 && spec.k == 64 && spec.t == 10) return {7, 0b10001001};  // x^7+x^3+1
  throw ParameterError("unsupported BCH code (" + std::to_string(spec.n) + "," +
                       std::to_string(spec.k) + ")");
}

// Product of two GF(2) bit polynomials.
uint64_t polymul2(uint64_t a, uint64_t b) {
  uint64_t r = 0;
  while (a) {
    if (a & 1) r ^= b;
    a >>= 1;
    b <<= 1;
  }
  return r;
}

}  // namespace

BchCode::BchCode(BchSpec spec)
    : spec_(spec), field_(field_for(spec).m, field_for(spec).primitive_poly) {
  const unsigned n = spec_.n;
  // g(x) = lcm of the minimal polynomials of alpha^1 .. alpha^2t, i.e. the
  // product over the distinct cyclotomic cosets.
  std::set<unsigned> covered;
  generator_ = 1;
  for (unsigned i = 1; i <= 2 * spec_.t; ++i) {
    if (covered.count(i)) continue;
    std::vector<unsigned> coset;
    unsigned j = i;
    while (!covered.count(j)) {
      covered.insert(j);
      coset.push_back(j);
      j = (j * 2) % n;
    }
    // Minimal polynomial: prod (x - alpha^c) over the coset. Coefficients
    // land in GF(2).
    std::vector<uint8_t> poly{1};
    for (unsigned c : coset) {
      uint8_t a = field_.alpha_pow(c);
      std::vector<uint8_t> next(poly.size() + 1, 0);
      for (size_t d = 0; d < poly.size(); ++d) {
        next[d + 1] ^= poly[d];
        next[d] ^= field_.mul(poly[d], a);
      }
      poly = std::move(next);
    }
    uint64_t bits = 0;
    for (size_t d = 0; d < poly.size(); ++d) {
      if (poly[d] > 1) throw ParameterError("minimal polynomial not binary");
      bits |= uint64_t(poly[d]) << d;
    }
    generator_ = polymul2(generator_, bits);
  }
  // Degree must match the designed redundancy.
  unsigned deg = 63 - static_cast<unsigned>(__builtin_clzll(generator_));
  if (deg != n - spec_.k)
    throw ParameterError("generator degree mismatch for requested (n,k)");
}

BchCode make_code(BchSpec spec) { return BchCode(spec); }

QuantizedFeature quantize(double w_component, std::pair<double, double> bounds,
                          const BchCode& code) {
  if (!std::isfinite(w_component))
    throw ArgumentError("quantize: non-finite input");
  auto [lo, hi] = bounds;
  if (!(lo < hi)) throw ArgumentError("quantize: bounds must satisfy lo < hi");
  const unsigned n = code.n();
  double scaled = (w_component - lo) / (hi - lo) * double(n);
  double rounded = std::round(scaled);  // half away from zero
  long level = std::lround(std::clamp(rounded, 0.0, double(n)));

  QuantizedFeature q;
  q.level = static_cast<unsigned>(level);
  q.bits.assign(n, 0);
  for (long i = 0; i < level; ++i) q.bits[i] = 1;
  return q;
}

Syndrome syndrome(const QuantizedFeature& q, const BchCode& code) {
  const unsigned n = code.n();
  if (q.bits.size() != n) throw ArgumentError("syndrome: bit length != n");
  const auto& field = code.field();
  Syndrome s(2 * code.t(), 0);
  for (unsigned i = 1; i <= 2 * code.t(); ++i) {
    uint8_t acc = 0;
    for (unsigned j = 0; j < n; ++j)
      if (q.bits[j]) acc ^= field.alpha_pow(uint64_t(i) * j);
    s[i - 1] = acc;
  }
  return s;
}

QuantizedFeature reproduce(const QuantizedFeature& q_noisy,
                           const Syndrome& stored, const BchCode& code) {
  const unsigned n = code.n();
  const unsigned t = code.t();
  if (q_noisy.bits.size() != n)
    throw ArgumentError("reproduce: bit length != n");
  if (stored.size() != 2 * t)
    throw ArgumentError("reproduce: syndrome length != 2t");
  const auto& field = code.field();

  // Difference syndrome = syndrome of the error vector noisy XOR enrolled.
  Syndrome s = syndrome(q_noisy, code);
  for (size_t i = 0; i < s.size(); ++i) s[i] ^= stored[i];

  QuantizedFeature out = q_noisy;
  bool all_zero = std::all_of(s.begin(), s.end(), [](uint8_t v) { return v == 0; });
  if (!all_zero) {
    // Berlekamp-Massey for the error locator Lambda(x).
    std::vector<uint8_t> lambda{1}, prev{1};
    unsigned l = 0, m = 1;
    uint8_t b = 1;
    for (unsigned step = 0; step < 2 * t; ++step) {
      uint8_t d = s[step];
      for (unsigned i = 1; i <= l && i < lambda.size(); ++i)
        if (lambda[i]) d ^= field.mul(lambda[i], s[step - i]);
      if (d == 0) {
        ++m;
      } else if (2 * l <= step) {
        std::vector<uint8_t> tmp = lambda;
        uint8_t coef = field.div(d, b);
        if (lambda.size() < prev.size() + m) lambda.resize(prev.size() + m, 0);
        for (size_t i = 0; i < prev.size(); ++i)
          if (prev[i]) lambda[i + m] ^= field.mul(coef, prev[i]);
        l = step + 1 - l;
        prev = std::move(tmp);
        b = d;
        m = 1;
      } else {
        uint8_t coef = field.div(d, b);
        if (lambda.size() < prev.size() + m) lambda.resize(prev.size() + m, 0);
        for (size_t i = 0; i < prev.size(); ++i)
          if (prev[i]) lambda[i + m] ^= field.mul(coef, prev[i]);
        ++m;
      }
    }
    if (l > t)
      throw IrrecoverableError("reproduce: more than t errors (locator degree " +
                               std::to_string(l) + ")");

    // Chien search: error at position p iff Lambda(alpha^-p) = 0.
    std::vector<unsigned> positions;
    for (unsigned p = 0; p < n; ++p) {
      uint8_t acc = 0;
      for (size_t i = 0; i < lambda.size(); ++i)
        if (lambda[i]) acc ^= field.mul(lambda[i], field.alpha_pow(uint64_t(i) * (n - p)));
      if (acc == 0) positions.push_back(p);
    }
    if (positions.size() != l)
      throw IrrecoverableError("reproduce: error locator has " +
                               std::to_string(positions.size()) + " roots, degree " +
                               std::to_string(l));
    for (unsigned p : positions) out.bits[p] ^= 1;

    // The corrected word must reproduce the stored syndrome.
    Syndrome check = syndrome(out, code);
    if (check != stored)
      throw IrrecoverableError("reproduce: corrected word fails syndrome check");
  }

  // Enrolled words are thermometer codes; anything else means the decoder
  // landed on a wrong codeword coset.
  unsigned ones = 0;
  while (ones < n && out.bits[ones]) ++ones;
  for (unsigned i = ones; i < n; ++i)
    if (out.bits[i])
      throw IrrecoverableError("reproduce: corrected word is not a thermometer code");
  out.level = ones;
  return out;
}

FeatureRandomness extract_randomness(const QuantizedFeature& q,
                                     const UniversalHashKey& hkey) {
  if (hkey.key.is_zero())
    throw ArgumentError("extract_randomness: hash key must be nonzero");
  if (hkey.output_bits == 0 || hkey.output_bits > 127)
    throw ArgumentError("extract_randomness: output_bits out of range");
  if (q.bits.size() > 127)
    throw ArgumentError("extract_randomness: word longer than 127 bits");

  gf::Gf127 word;
  for (size_t j = 0; j < q.bits.size(); ++j)
    if (q.bits[j]) gf::gf127_set_bit(word, static_cast<unsigned>(j));

  gf::Gf127 product = gf::gf127_mul(hkey.key, word);

  FeatureRandomness r;
  r.bits.resize(hkey.output_bits);
  for (unsigned i = 0; i < hkey.output_bits; ++i)
    r.bits[i] = static_cast<uint8_t>(gf::gf127_bit(product, 126 - i));
  return r;
}

}  // namespace neurokey::fuzzy
