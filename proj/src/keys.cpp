#include "neurokey/keys.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "neurokey/crypto.hpp"
#include "neurokey/errors.hpp"
#include "neurokey/rng.hpp"

namespace neurokey::keys {

void PipelineConfig::validate() const {
  if (key_features * hash_bits != 128)
    throw ConfigError("q * l must equal 128 bits");
  if (hash_bits % 8 != 0 || hash_bits > 127)
    throw ConfigError("hash_bits must be a multiple of 8 and at most 127");
  if (key_features > degree + 3)
    throw ConfigError("more selected features than feature dimensions");
  if (!(scale_c > 0) || !(theta > 0) || !(window_seconds > 0) || !(amplitude > 0))
    throw ConfigError("scale, theta, window and amplitude must be positive");
  if (!(sigma_scale >= 0) || !(sigma_floor > 0))
    throw ConfigError("sigma_scale must be >= 0 and sigma_floor > 0");
}

namespace {

std::pair<double, double> bounds_for(double w, const PipelineConfig& config) {
  double sigma = config.sigma_scale * std::fabs(w) + config.sigma_floor;
  return {w - 5.0 * sigma, w + 5.0 * sigma};
}

std::vector<uint8_t> hash_keys_payload(const std::vector<fuzzy::UniversalHashKey>& hkeys) {
  std::vector<uint8_t> out;
  out.reserve(hkeys.size() * 17);
  for (const auto& hk : hkeys) {
    for (int i = 0; i < 8; ++i) out.push_back(uint8_t(hk.key.lo >> (8 * i)));
    for (int i = 0; i < 8; ++i) out.push_back(uint8_t(hk.key.hi >> (8 * i)));
    out.push_back(uint8_t(hk.output_bits));
  }
  return out;
}

// K bits 0..l-1 = r_{j1}, next l bits = r_{j2}, ...; bit 0 is the MSB of
// byte 0.
SessionKey assemble_key(const std::vector<fuzzy::FeatureRandomness>& parts) {
  SessionKey key;
  unsigned bit = 0;
  for (const auto& r : parts) {
    for (uint8_t v : r.bits) {
      if (v) key.bytes[bit / 8] |= uint8_t(0x80u >> (bit % 8));
      ++bit;
    }
  }
  if (bit != 128) throw ConfigError("concatenated randomness is not 128 bits");
  return key;
}

std::array<uint8_t, 16> compute_key_check(
    const std::vector<fuzzy::UniversalHashKey>& hkeys, const SessionKey& key) {
  // Record-unique salt: the serialized hash-key section.
  std::vector<uint8_t> buf = hash_keys_payload(hkeys);
  buf.insert(buf.end(), key.bytes.begin(), key.bytes.end());
  auto digest = crypto::sha256(buf);
  std::array<uint8_t, 16> out{};
  std::memcpy(out.data(), digest.data(), 16);
  return out;
}

features::MaskedFeatureVector run_pipeline(const eeg::EegRecord& record,
                                           const PipelineConfig& config,
                                           unsigned degree,
                                           const features::MaskParameters& mask) {
  eeg::BetaSignal beta =
      eeg::extract_beta(record, config.window_seconds, config.amplitude);
  features::LegendreFit fit = features::fit_legendre(beta, degree);
  features::RawFeatureVector z =
      features::build_raw_features(fit, beta, config.scale_c);
  return features::mask_features(z, mask);
}

}  // namespace

Enrollment enroll(const eeg::EegRecord& record, const PipelineConfig& config,
                  uint64_t seed) {
  config.validate();

  uint64_t state = seed;
  uint64_t mask_seed = rng::splitmix64(state);
  uint64_t hash_seed = rng::splitmix64(state);
  uint64_t select_seed = rng::splitmix64(state);

  const unsigned d = config.degree + 3;
  features::MaskParameters mask =
      features::generate_mask(mask_seed, d, config.theta);
  features::MaskedFeatureVector w = run_pipeline(record, config, config.degree, mask);

  fuzzy::BchCode code = fuzzy::make_code(config.code);

  EnrollmentRecord enr;
  enr.code = config.code;
  enr.mask = mask;
  enr.quantizer_bounds.reserve(d);
  enr.syndromes.reserve(d);
  enr.hash_keys.reserve(d);

  rng::Prng hash_rng(hash_seed);
  std::vector<fuzzy::FeatureRandomness> randomness(d);
  for (unsigned i = 0; i < d; ++i) {
    auto bounds = bounds_for(w.values[i], config);
    fuzzy::QuantizedFeature q = fuzzy::quantize(w.values[i], bounds, code);
    enr.quantizer_bounds.push_back(bounds);
    enr.syndromes.push_back(fuzzy::syndrome(q, code));

    fuzzy::UniversalHashKey hk;
    hk.output_bits = config.hash_bits;
    do {
      hk.key.lo = hash_rng.next_u64();
      hk.key.hi = hash_rng.next_u64() & 0x7FFFFFFFFFFFFFFFull;
    } while (hk.key.is_zero());
    enr.hash_keys.push_back(hk);
    randomness[i] = fuzzy::extract_randomness(q, hk);
  }

  // q distinct 1-based indices, strictly increasing.
  rng::Prng select_rng(select_seed);
  std::set<uint16_t> chosen;
  while (chosen.size() < config.key_features)
    chosen.insert(uint16_t(1 + select_rng.next_u64() % d));
  enr.selection_indices.assign(chosen.begin(), chosen.end());

  std::vector<fuzzy::FeatureRandomness> selected;
  for (uint16_t j : enr.selection_indices) selected.push_back(randomness[j - 1]);
  SessionKey key = assemble_key(selected);
  enr.key_check = compute_key_check(enr.hash_keys, key);

  return {key, enr};
}

SessionKey reproduce_key(const eeg::EegRecord& fresh,
                         const EnrollmentRecord& enrollment,
                         const PipelineConfig& config) {
  const unsigned d = enrollment.mask.dimension;
  if (d < 4) throw ArgumentError("reproduce_key: mask dimension too small");
  const unsigned degree = d - 3;
  if (enrollment.quantizer_bounds.size() != d || enrollment.syndromes.size() != d ||
      enrollment.hash_keys.size() != d)
    throw ArgumentError("reproduce_key: inconsistent enrollment record");

  features::MaskedFeatureVector w =
      run_pipeline(fresh, config, degree, enrollment.mask);
  fuzzy::BchCode code = fuzzy::make_code(enrollment.code);

  std::vector<fuzzy::FeatureRandomness> selected;
  for (uint16_t j : enrollment.selection_indices) {
    if (j < 1 || j > d)
      throw ArgumentError("reproduce_key: selection index out of range");
    unsigned i = j - 1;
    fuzzy::QuantizedFeature noisy =
        fuzzy::quantize(w.values[i], enrollment.quantizer_bounds[i], code);
    fuzzy::QuantizedFeature corrected;
    try {
      corrected = fuzzy::reproduce(noisy, enrollment.syndromes[i], code);
    } catch (const IrrecoverableError&) {
      throw AuthenticationError("key reproduction failed: feature " +
                                std::to_string(j) + " irrecoverable");
    }
    selected.push_back(fuzzy::extract_randomness(corrected, enrollment.hash_keys[i]));
  }

  SessionKey key = assemble_key(selected);
  auto check = compute_key_check(enrollment.hash_keys, key);
  if (!crypto::ct_equal(check, enrollment.key_check))
    throw AuthenticationError("key reproduction failed: key-check mismatch");
  return key;
}

Enrollment rotate_key(const eeg::EegRecord& fresh, const PipelineConfig& config,
                      uint64_t new_seed) {
  return enroll(fresh, config, new_seed);
}

namespace {

constexpr char kMagic[4] = {'N', 'K', 'E', 'Y'};
constexpr uint8_t kRecordVersion = 1;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(uint8_t(bits >> (8 * i)));
}

void put_section(std::vector<uint8_t>& out, const std::vector<uint8_t>& payload) {
  put_u32(out, uint32_t(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
}

struct Reader {
  std::span<const uint8_t> data;
  size_t pos = 0;
  void need(size_t n) const {
    if (pos + n > data.size()) throw ParseError("enrollment record truncated");
  }
  uint8_t u8() { need(1); return data[pos++]; }
  uint16_t u16() { uint16_t v = u8(); return uint16_t(v | (uint16_t(u8()) << 8)); }
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(u8()) << (8 * i);
    return v;
  }
  uint64_t u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(u8()) << (8 * i);
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::span<const uint8_t> section() {
    uint32_t len = u32();
    need(len);
    auto s = data.subspan(pos, len);
    pos += len;
    return s;
  }
};

}  // namespace

std::vector<uint8_t> EnrollmentRecord::to_bytes() const {
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(version);

  std::vector<uint8_t> sec;
  put_u16(sec, uint16_t(code.n));
  put_u16(sec, uint16_t(code.k));
  put_u16(sec, uint16_t(code.t));
  put_section(out, sec);

  put_section(out, features::encode_mask(mask));

  sec.clear();
  for (const auto& [lo, hi] : quantizer_bounds) {
    put_f64(sec, lo);
    put_f64(sec, hi);
  }
  put_section(out, sec);

  sec.clear();
  for (const auto& s : syndromes) sec.insert(sec.end(), s.begin(), s.end());
  put_section(out, sec);

  put_section(out, hash_keys_payload(hash_keys));

  sec.clear();
  for (uint16_t j : selection_indices) put_u16(sec, j);
  put_section(out, sec);

  sec.assign(key_check.begin(), key_check.end());
  put_section(out, sec);
  return out;
}

EnrollmentRecord EnrollmentRecord::from_bytes(std::span<const uint8_t> data) {
  Reader r{data};
  r.need(5);
  if (std::memcmp(data.data(), kMagic, 4) != 0)
    throw ParseError("enrollment record: bad magic");
  r.pos = 4;
  EnrollmentRecord enr;
  enr.version = r.u8();
  if (enr.version != kRecordVersion)
    throw ParseError("enrollment record: unsupported version");

  {
    Reader s{r.section()};
    enr.code.n = s.u16();
    enr.code.k = s.u16();
    enr.code.t = s.u16();
  }
  enr.mask = features::decode_mask(r.section());
  const unsigned d = enr.mask.dimension;

  {
    Reader s{r.section()};
    if (s.data.size() != size_t(d) * 16)
      throw ParseError("enrollment record: bounds section size mismatch");
    for (unsigned i = 0; i < d; ++i) {
      double lo = s.f64();
      double hi = s.f64();
      enr.quantizer_bounds.emplace_back(lo, hi);
    }
  }
  {
    Reader s{r.section()};
    size_t per = 2 * size_t(enr.code.t);
    if (per == 0 || s.data.size() != per * d)
      throw ParseError("enrollment record: syndrome section size mismatch");
    for (unsigned i = 0; i < d; ++i) {
      fuzzy::Syndrome syn(s.data.begin() + i * per, s.data.begin() + (i + 1) * per);
      enr.syndromes.push_back(std::move(syn));
    }
  }
  {
    Reader s{r.section()};
    if (s.data.size() != size_t(d) * 17)
      throw ParseError("enrollment record: hash-key section size mismatch");
    for (unsigned i = 0; i < d; ++i) {
      fuzzy::UniversalHashKey hk;
      hk.key.lo = s.u64();
      hk.key.hi = s.u64();
      hk.output_bits = s.u8();
      if (hk.key.is_zero() || (hk.key.hi >> 63) != 0)
        throw ParseError("enrollment record: invalid hash key");
      enr.hash_keys.push_back(hk);
    }
  }
  {
    Reader s{r.section()};
    if (s.data.size() % 2 != 0)
      throw ParseError("enrollment record: index section size mismatch");
    uint16_t prev = 0;
    while (s.pos < s.data.size()) {
      uint16_t j = s.u16();
      if (j < 1 || j > d || j <= prev)
        throw ParseError("enrollment record: indices not strictly increasing in [1,d]");
      enr.selection_indices.push_back(j);
      prev = j;
    }
    if (enr.selection_indices.empty())
      throw ParseError("enrollment record: no selection indices");
  }
  {
    Reader s{r.section()};
    if (s.data.size() != 16)
      throw ParseError("enrollment record: key-check section size mismatch");
    std::memcpy(enr.key_check.data(), s.data.data(), 16);
  }
  if (r.pos != data.size())
    throw ParseError("enrollment record: trailing bytes");
  return enr;
}

void EnrollmentRecord::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write enrollment file: " + path.string());
  auto bytes = to_bytes();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

EnrollmentRecord EnrollmentRecord::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open enrollment file: " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return from_bytes(bytes);
}

std::string EnrollmentRecord::fingerprint() const {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 4; ++i) {
    out.push_back(hex[key_check[i] >> 4]);
    out.push_back(hex[key_check[i] & 0xF]);
  }
  return out;
}

}  // namespace neurokey::keys
