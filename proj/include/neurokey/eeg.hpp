#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace neurokey::eeg {

// Raw EEG sample stream plus capture metadata.
struct EegRecord {
  std::vector<double> samples;  // microvolts
  double sample_rate_hz = 512.0;
  std::string subject_id;
  std::string task_label;
};

// Beta-band content of one analysis window.
struct BetaSignal {
  std::vector<double> samples;
  double sample_rate_hz = 512.0;
  double window_seconds = 0.0;        // T
  double amplitude_multiplier = 1.0;  // A
};

struct Tone {
  double freq_hz;
  double amplitude;
  double phase;
};

enum class RecordFormat { Csv };

// CSV reader: optional '#key=value' header lines (sample_rate_hz, subject_id,
// task_label), then one decimal sample per line.
EegRecord load_record(const std::filesystem::path& path,
                      RecordFormat format = RecordFormat::Csv);

void save_record(const EegRecord& record, const std::filesystem::path& path);

// Deterministic test-signal generator: sum of tones plus gaussian noise.
EegRecord synthesize_beta(uint64_t seed, double duration_s,
                          double sample_rate_hz, const std::vector<Tone>& tones,
                          double noise_std);

// First window_seconds of the record, band-passed to 12-30 Hz (4th-order
// zero-phase Butterworth) and scaled by amplitude_multiplier.
BetaSignal extract_beta(const EegRecord& record, double window_seconds,
                        double amplitude_multiplier);

}  // namespace neurokey::eeg
