#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <set>
#include <vector>

#include "neurokey/eeg.hpp"
#include "neurokey/errors.hpp"
#include "neurokey/features.hpp"
#include "neurokey/fuzzy.hpp"
#include "neurokey/keys.hpp"

using namespace neurokey;

namespace {

eeg::EegRecord subject_record(uint64_t subject_seed) {
  // Three beta-band tones whose parameters vary per subject.
  double f1 = 13.0 + double(subject_seed % 7);
  double f2 = 19.0 + double((subject_seed / 7) % 6);
  double f3 = 26.0 + double((subject_seed / 42) % 4);
  return eeg::synthesize_beta(subject_seed, 2.5, 512.0,
                              {{f1, 1.0, 0.1 * double(subject_seed % 5)},
                               {f2, 0.6, 0.4},
                               {f3, 0.3, 1.2}},
                              0.2);
}

}  // namespace

TEST_CASE("enroll is deterministic and yields a 16-byte key") {
  auto rec = subject_record(10);
  auto a = keys::enroll(rec, {}, 42);
  auto b = keys::enroll(rec, {}, 42);
  CHECK(a.key == b.key);
  CHECK(a.key.bytes.size() == 16);
  CHECK(a.record.to_bytes() == b.record.to_bytes());
  CHECK(a.record.selection_indices.size() == 4);
  for (size_t i = 1; i < a.record.selection_indices.size(); ++i)
    CHECK(a.record.selection_indices[i] > a.record.selection_indices[i - 1]);
  for (uint16_t j : a.record.selection_indices) {
    CHECK(j >= 1);
    CHECK(j <= 11);
  }
}

TEST_CASE("distinct subjects and seeds give distinct keys") {
  std::set<std::array<uint8_t, 16>> seen;
  for (uint64_t s = 0; s < 20; ++s) {
    auto e = keys::enroll(subject_record(s), {}, 1000 + s);
    CHECK(seen.insert(e.key.bytes).second);
  }
}

TEST_CASE("enrollment record round-trips bit-exactly") {
  auto e = keys::enroll(subject_record(3), {}, 7);
  auto bytes = e.record.to_bytes();
  auto back = keys::EnrollmentRecord::from_bytes(bytes);
  CHECK(back.to_bytes() == bytes);
  CHECK(back.fingerprint() == e.record.fingerprint());
  CHECK(back.fingerprint().size() == 8);

  auto path = std::filesystem::temp_directory_path() / "nk_enr.bin";
  e.record.save(path);
  auto loaded = keys::EnrollmentRecord::load(path);
  CHECK(loaded.to_bytes() == bytes);
}

TEST_CASE("serialized record never contains the key") {
  auto e = keys::enroll(subject_record(4), {}, 11);
  auto bytes = e.record.to_bytes();
  REQUIRE(bytes.size() >= 16);
  for (size_t off = 0; off + 16 <= bytes.size(); ++off)
    CHECK(std::memcmp(bytes.data() + off, e.key.bytes.data(), 16) != 0);
}

TEST_CASE("record parsing rejects corruption") {
  auto e = keys::enroll(subject_record(5), {}, 13);
  auto bytes = e.record.to_bytes();

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(keys::EnrollmentRecord::from_bytes(bad_magic), ParseError);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(keys::EnrollmentRecord::from_bytes(truncated), ParseError);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(keys::EnrollmentRecord::from_bytes(trailing), ParseError);
}

TEST_CASE("key equals concatenation of independently recomputed randomness") {
  keys::PipelineConfig config;
  auto rec = subject_record(6);
  auto e = keys::enroll(rec, config, 99);

  // Re-run the pipeline from the public record only.
  auto beta = eeg::extract_beta(rec, config.window_seconds, config.amplitude);
  auto fit = features::fit_legendre(beta, e.record.mask.dimension - 3);
  auto z = features::build_raw_features(fit, beta, config.scale_c);
  auto w = features::mask_features(z, e.record.mask);
  auto code = fuzzy::make_code(e.record.code);

  std::vector<uint8_t> bits;
  for (uint16_t j : e.record.selection_indices) {
    unsigned i = j - 1;
    auto q = fuzzy::quantize(w.values[i], e.record.quantizer_bounds[i], code);
    auto r = fuzzy::extract_randomness(q, e.record.hash_keys[i]);
    bits.insert(bits.end(), r.bits.begin(), r.bits.end());
  }
  REQUIRE(bits.size() == 128);
  std::array<uint8_t, 16> packed{};
  for (unsigned b = 0; b < 128; ++b)
    if (bits[b]) packed[b / 8] |= uint8_t(0x80u >> (b % 8));
  CHECK(packed == e.key.bytes);
}

TEST_CASE("reproduce_key recovers the key from the exact record") {
  auto rec = subject_record(7);
  auto e = keys::enroll(rec, {}, 21);
  auto key = keys::reproduce_key(rec, e.record);
  CHECK(key == e.key);
}

TEST_CASE("reproduce_key tolerates small noise, rejects cross-subject") {
  auto rec = subject_record(8);
  auto e = keys::enroll(rec, {}, 31);

  // tiny additive noise: well within +-10 quantization levels
  eeg::EegRecord noisy = rec;
  auto jitter = eeg::synthesize_beta(555, 2.5, 512.0, {{17.0, 1.0, 0.0}}, 1.0);
  for (size_t i = 0; i < noisy.samples.size(); ++i)
    noisy.samples[i] += 1e-7 * jitter.samples[i];
  CHECK(keys::reproduce_key(noisy, e.record) == e.key);

  auto other = subject_record(9);
  CHECK_THROWS_AS(keys::reproduce_key(other, e.record), AuthenticationError);
}

TEST_CASE("cross-subject reproduction fails across 100 pairs") {
  int rejected = 0;
  for (uint64_t s = 0; s < 100; ++s) {
    auto e = keys::enroll(subject_record(s), {}, 5000 + s);
    try {
      keys::reproduce_key(subject_record(s + 1), e.record);
    } catch (const AuthenticationError&) {
      ++rejected;
    }
  }
  CHECK(rejected == 100);
}

TEST_CASE("100 rotations produce pairwise-distinct keys") {
  auto rec = subject_record(33);
  std::set<std::array<uint8_t, 16>> seen;
  auto base = keys::enroll(rec, {}, 1);
  seen.insert(base.key.bytes);
  for (uint64_t s = 2; s <= 100; ++s) {
    auto rot = keys::rotate_key(rec, {}, s);
    CHECK(seen.insert(rot.key.bytes).second);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("rotate_key supersedes the old enrollment") {
  auto rec = subject_record(12);
  auto e1 = keys::enroll(rec, {}, 41);
  auto e2 = keys::rotate_key(rec, {}, 43);
  CHECK(!(e1.key == e2.key));

  auto e2b = keys::rotate_key(rec, {}, 43);
  CHECK(e2.key == e2b.key);
  CHECK(e2.record.to_bytes() == e2b.record.to_bytes());

  // the new record reproduces the new key, not the old one
  auto key = keys::reproduce_key(rec, e2.record);
  CHECK(key == e2.key);
  CHECK(!(key == e1.key));
}

TEST_CASE("pipeline config validation") {
  keys::PipelineConfig bad;
  bad.hash_bits = 33;
  CHECK_THROWS_AS(keys::enroll(subject_record(1), bad, 1), ConfigError);

  keys::PipelineConfig bad2;
  bad2.key_features = 3;
  CHECK_THROWS_AS(keys::enroll(subject_record(1), bad2, 1), ConfigError);

  keys::PipelineConfig ok2;
  ok2.key_features = 2;
  ok2.hash_bits = 64;
  auto e = keys::enroll(subject_record(1), ok2, 1);
  CHECK(e.record.selection_indices.size() == 2);
  CHECK(keys::reproduce_key(subject_record(1), e.record, ok2) == e.key);
}

TEST_CASE("supported code variants work end-to-end") {
  for (fuzzy::BchSpec spec : {fuzzy::BchSpec{15, 7, 2}, fuzzy::BchSpec{31, 16, 3}}) {
    keys::PipelineConfig cfg;
    cfg.code = spec;
    auto rec = subject_record(14);
    auto e = keys::enroll(rec, cfg, 5);
    CHECK(keys::reproduce_key(rec, e.record, cfg) == e.key);
  }
}
