#include "neurokey/eeg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>

#include "neurokey/errors.hpp"
#include "neurokey/rng.hpp"

namespace neurokey::eeg {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& token, size_t line_no) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": invalid sample '" +
                     token + "'");
  return v;
}

}  // namespace

EegRecord load_record(const std::filesystem::path& path, RecordFormat format) {
  if (format != RecordFormat::Csv)
    throw ArgumentError("unsupported record format");
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open EEG file: " + path.string());

  EegRecord rec;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::string kv = trim(t.substr(1));
      size_t eq = kv.find('=');
      if (eq == std::string::npos) continue;
      std::string key = trim(kv.substr(0, eq));
      std::string value = trim(kv.substr(eq + 1));
      if (key == "sample_rate_hz") {
        double r = parse_double(value, line_no);
        if (r <= 0)
          throw ParseError("line " + std::to_string(line_no) +
                           ": sample_rate_hz must be positive");
        rec.sample_rate_hz = r;
      } else if (key == "subject_id") {
        rec.subject_id = value;
      } else if (key == "task_label") {
        rec.task_label = value;
      }
      continue;
    }
    rec.samples.push_back(parse_double(t, line_no));
  }
  if (rec.samples.empty())
    throw InsufficientDataError("empty EEG file: " + path.string());
  return rec;
}

void save_record(const EegRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write EEG file: " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", record.sample_rate_hz);
  out << "# sample_rate_hz=" << buf << "\n";
  if (!record.subject_id.empty()) out << "# subject_id=" << record.subject_id << "\n";
  if (!record.task_label.empty()) out << "# task_label=" << record.task_label << "\n";
  for (double s : record.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", s);
    out << buf << "\n";
  }
}

EegRecord synthesize_beta(uint64_t seed, double duration_s,
                          double sample_rate_hz, const std::vector<Tone>& tones,
                          double noise_std) {
  if (!(duration_s > 0) || !(sample_rate_hz > 0))
    throw ArgumentError("synthesize_beta: duration and rate must be positive");
  if (!(noise_std >= 0))
    throw ArgumentError("synthesize_beta: noise_std must be non-negative");
  for (const Tone& t : tones)
    if (!std::isfinite(t.freq_hz) || !std::isfinite(t.amplitude) ||
        !std::isfinite(t.phase))
      throw ArgumentError("synthesize_beta: non-finite tone parameter");

  auto n = static_cast<size_t>(std::llround(duration_s * sample_rate_hz));
  if (n == 0) throw ArgumentError("synthesize_beta: window has zero samples");

  EegRecord rec;
  rec.sample_rate_hz = sample_rate_hz;
  rec.subject_id = "synth:" + std::to_string(seed);
  rec.samples.resize(n);
  rng::Prng prng(seed);
  const double two_pi = 2.0 * std::numbers::pi;
  for (size_t k = 0; k < n; ++k) {
    double t = double(k) / sample_rate_hz;
    double v = 0.0;
    for (const Tone& tone : tones)
      v += tone.amplitude * std::sin(two_pi * tone.freq_hz * t + tone.phase);
    if (noise_std > 0) v += noise_std * prng.gaussian();
    rec.samples[k] = v;
  }
  return rec;
}

namespace {

struct FilterCoeffs {
  std::array<double, 5> b;
  std::array<double, 5> a;
};

// Digital Butterworth band-pass of overall order 4 (order-2 analog prototype,
// lowpass-to-bandpass transform, bilinear transform with prewarped corners).
FilterCoeffs design_bandpass(double f_lo, double f_hi, double fs) {
  using cd = std::complex<double>;
  if (!(f_hi > f_lo) || !(f_lo > 0) || !(f_hi < fs / 2))
    throw ArgumentError("band-pass corners need 0 < lo < hi < fs/2");

  const double pi = std::numbers::pi;
  const double fs2 = 2.0 * fs;
  const double w1 = fs2 * std::tan(pi * f_lo / fs);
  const double w2 = fs2 * std::tan(pi * f_hi / fs);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Order-2 prototype poles at 135 and 225 degrees.
  const cd proto[2] = {cd(-std::sqrt(0.5), std::sqrt(0.5)),
                       cd(-std::sqrt(0.5), -std::sqrt(0.5))};
  cd apoles[4];
  for (int i = 0; i < 2; ++i) {
    cd pb = proto[i] * (bw / 2.0);
    cd d = std::sqrt(pb * pb - w0sq);
    apoles[2 * i] = pb + d;
    apoles[2 * i + 1] = pb - d;
  }

  // Bilinear transform. Analog zeros: two at s = 0 (map to z = 1); the two
  // relative-degree zeros land at z = -1. Gain bw^2 carried through.
  cd zpoles[4];
  cd gain = bw * bw;
  gain *= (fs2 * fs2);  // (fs2 - s_zero)^2 with s_zero = 0
  for (int i = 0; i < 4; ++i) {
    zpoles[i] = (fs2 + apoles[i]) / (fs2 - apoles[i]);
    gain /= (fs2 - apoles[i]);
  }
  double k = gain.real();

  // b(z) = k (z-1)^2 (z+1)^2 = k (z^4 - 2 z^2 + 1)
  FilterCoeffs c;
  c.b = {k, 0.0, -2.0 * k, 0.0, k};

  // a(z) = prod (z - p_i), conjugate pairs make it real.
  cd acc[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j >= 1; --j) acc[j] = acc[j - 1] - zpoles[i] * acc[j];
    acc[0] = -zpoles[i] * acc[0];
  }
  // acc now holds coefficients with acc[4] x^4 ... acc[0] constant.
  for (int i = 0; i < 5; ++i) c.a[i] = acc[4 - i].real();
  return c;
}

// Steady-state initial filter state for a unit-step input (direct form II
// transposed), so the forward-backward passes start transient-free.
std::array<double, 4> lfilter_zi(const FilterCoeffs& c) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  // I - companion(a)^T
  for (int i = 0; i < 4; ++i) {
    m(i, 0) = c.a[i + 1];
    m(i, i) += 1.0;
    if (i < 3) m(i, i + 1) -= 1.0;
  }
  Eigen::Vector4d rhs;
  for (int i = 0; i < 4; ++i) rhs(i) = c.b[i + 1] - c.a[i + 1] * c.b[0];
  Eigen::Vector4d zi = m.partialPivLu().solve(rhs);
  return {zi(0), zi(1), zi(2), zi(3)};
}

void lfilter(const FilterCoeffs& c, const std::array<double, 4>& zi_scaled,
             const std::vector<double>& x, std::vector<double>& y) {
  double z0 = zi_scaled[0], z1 = zi_scaled[1], z2 = zi_scaled[2], z3 = zi_scaled[3];
  y.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double xi = x[i];
    double yi = c.b[0] * xi + z0;
    z0 = c.b[1] * xi - c.a[1] * yi + z1;
    z1 = c.b[2] * xi - c.a[2] * yi + z2;
    z2 = c.b[3] * xi - c.a[3] * yi + z3;
    z3 = c.b[4] * xi - c.a[4] * yi;
    y[i] = yi;
  }
}

// Zero-phase forward-backward filtering with odd-reflection edge padding.
std::vector<double> filtfilt(const FilterCoeffs& c, const std::vector<double>& x) {
  const size_t n = x.size();
  size_t padlen = std::min<size_t>(15, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::array<double, 4> zi = lfilter_zi(c);
  auto scaled = [&](double v) {
    return std::array<double, 4>{zi[0] * v, zi[1] * v, zi[2] * v, zi[3] * v};
  };

  std::vector<double> y;
  lfilter(c, scaled(ext[0]), ext, y);
  std::reverse(y.begin(), y.end());
  std::vector<double> y2;
  lfilter(c, scaled(y[0]), y, y2);
  std::reverse(y2.begin(), y2.end());

  return {y2.begin() + padlen, y2.begin() + padlen + n};
}

}  // namespace

BetaSignal extract_beta(const EegRecord& record, double window_seconds,
                        double amplitude_multiplier) {
  if (!(window_seconds > 0))
    throw ArgumentError("extract_beta: window_seconds must be positive");
  if (!(amplitude_multiplier > 0))
    throw ArgumentError("extract_beta: amplitude_multiplier must be positive");
  if (!(record.sample_rate_hz > 60))
    throw ArgumentError("extract_beta: sample rate too low for the 12-30 Hz band");

  auto n = static_cast<size_t>(std::llround(window_seconds * record.sample_rate_hz));
  if (n < 2) throw ArgumentError("extract_beta: window too small");
  if (record.samples.size() < n)
    throw InsufficientDataError("record shorter than one window (" +
                                std::to_string(record.samples.size()) + " < " +
                                std::to_string(n) + " samples)");

  FilterCoeffs c = design_bandpass(12.0, 30.0, record.sample_rate_hz);
  std::vector<double> window(record.samples.begin(), record.samples.begin() + n);
  for (double v : window)
    if (!std::isfinite(v)) throw ArgumentError("extract_beta: non-finite sample");
  std::vector<double> filtered = filtfilt(c, window);
  for (double& v : filtered) v *= amplitude_multiplier;

  BetaSignal out;
  out.samples = std::move(filtered);
  out.sample_rate_hz = record.sample_rate_hz;
  out.window_seconds = window_seconds;
  out.amplitude_multiplier = amplitude_multiplier;
  return out;
}

}  // namespace neurokey::eeg
