#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "neurokey/eeg.hpp"
#include "neurokey/features.hpp"
#include "neurokey/fuzzy.hpp"

namespace neurokey::keys {

// Shared pipeline parameters. Both ends of the link must agree on these;
// they are not stored in the public enrollment record.
struct PipelineConfig {
  unsigned degree = 8;           // Legendre fit degree n
  double scale_c = 100.0;        // coefficient magnifier c
  double theta = 4.0;            // mask offset exponent
  fuzzy::BchSpec code{127, 64, 10};
  unsigned hash_bits = 32;       // l, randomness per feature
  unsigned key_features = 4;     // q, features concatenated into the key
  double window_seconds = 2.0;   // T
  double amplitude = 2.0;        // A
  double sigma_scale = 0.05;     // quantizer noise scale: sigma = scale*|w| + floor
  double sigma_floor = 0.01;

  void validate() const;
};

struct SessionKey {
  std::array<uint8_t, 16> bytes{};
  friend bool operator==(const SessionKey&, const SessionKey&) = default;
};

// Public helper data. Enables key reproduction from a noisy re-reading but
// holds no raw feature values, fit coefficients or key bits.
struct EnrollmentRecord {
  uint8_t version = 1;
  fuzzy::BchSpec code;
  features::MaskParameters mask;
  std::vector<std::pair<double, double>> quantizer_bounds;  // per feature
  std::vector<fuzzy::Syndrome> syndromes;                   // per feature
  std::vector<fuzzy::UniversalHashKey> hash_keys;           // per feature
  std::vector<uint16_t> selection_indices;                  // 1-based, strictly increasing
  std::array<uint8_t, 16> key_check{};

  std::vector<uint8_t> to_bytes() const;
  static EnrollmentRecord from_bytes(std::span<const uint8_t> data);
  void save(const std::filesystem::path& path) const;
  static EnrollmentRecord load(const std::filesystem::path& path);

  // First 8 hex chars of key_check.
  std::string fingerprint() const;
};

struct Enrollment {
  SessionKey key;
  EnrollmentRecord record;
};

Enrollment enroll(const eeg::EegRecord& record, const PipelineConfig& config,
                  uint64_t seed);

// Re-derives the session key from a fresh reading; throws
// AuthenticationError when any selected feature is irrecoverable or the
// key-check tag does not match.
SessionKey reproduce_key(const eeg::EegRecord& fresh,
                         const EnrollmentRecord& enrollment,
                         const PipelineConfig& config = {});

// Fresh enrollment under a new seed; the old record is superseded.
Enrollment rotate_key(const eeg::EegRecord& fresh, const PipelineConfig& config,
                      uint64_t new_seed);

}  // namespace neurokey::keys
