// Command-line front end: enrollment, key reproduction, frame inspection and
// scenario simulation. Exit codes: 0 success, 1 usage/input error,
// 2 authentication or crypto failure, 3 scenario timeout.

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neurokey/eeg.hpp"
#include "neurokey/errors.hpp"
#include "neurokey/keys.hpp"
#include "neurokey/link.hpp"
#include "neurokey/sim.hpp"

namespace {

using namespace neurokey;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAuth = 2;
constexpr int kExitTimeout = 3;

bool g_timestamps = true;

void note(const std::string& msg) {
  if (g_timestamps) {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", std::gmtime(&now));
    std::cerr << "[" << buf << "] " << msg << "\n";
  } else {
    std::cerr << msg << "\n";
  }
}

std::string to_hex(const uint8_t* data, size_t len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (size_t i = 0; i < len; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xF]);
  }
  return out;
}

std::vector<uint8_t> from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw ArgumentError("hex string has odd length");
  std::vector<uint8_t> out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int a = nibble(hex[i]), b = nibble(hex[i + 1]);
    if (a < 0 || b < 0) throw ArgumentError("invalid hex digit in input");
    out.push_back(uint8_t((a << 4) | b));
  }
  return out;
}

bool parse_code_spec(const std::string& text, fuzzy::BchSpec& spec) {
  unsigned n = 0, k = 0;
  if (std::sscanf(text.c_str(), "%u,%u", &n, &k) != 2) return false;
  if (n == 15 && k == 7) spec = {15, 7, 2};
  else if (n == 31 && k == 16) spec = {31, 16, 3};
  else if (n == 127 && k == 64) spec = {127, 64, 10};
  else return false;
  return true;
}

int cmd_enroll(const std::string& eeg_path, const std::string& out_path,
               uint64_t seed, unsigned degree, double c, double theta,
               const std::string& code_text, bool emit_key_hex) {
  keys::PipelineConfig config;
  config.degree = degree;
  config.scale_c = c;
  config.theta = theta;
  if (!code_text.empty() && !parse_code_spec(code_text, config.code)) {
    std::cerr << "error: unsupported --code value '" << code_text
              << "' (use 15,7 or 31,16 or 127,64)\n";
    return kExitUsage;
  }

  eeg::EegRecord record;
  try {
    record = eeg::load_record(eeg_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    keys::Enrollment enrollment = keys::enroll(record, config, seed);
    enrollment.record.save(out_path);
    std::cout << enrollment.record.fingerprint() << "\n";
    if (emit_key_hex)
      std::cout << to_hex(enrollment.key.bytes.data(), 16) << "\n";
    note("enrollment written to " + out_path);
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAuth;
  }
}

int cmd_reproduce(const std::string& eeg_path, const std::string& enrollment_path,
                  double c) {
  eeg::EegRecord record;
  keys::EnrollmentRecord enrollment;
  try {
    record = eeg::load_record(eeg_path);
    enrollment = keys::EnrollmentRecord::load(enrollment_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    keys::PipelineConfig config;
    config.scale_c = c;
    keys::reproduce_key(record, enrollment, config);
    std::cout << enrollment.fingerprint() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAuth;
  }
}

int cmd_simulate(const std::string& scenario_path, const std::string& events_path,
                 const std::string& trajectory_path) {
  sim::ScenarioConfig config;
  try {
    config = sim::ScenarioConfig::load(scenario_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    sim::ScenarioResult result = sim::run_scenario(config);
    std::ofstream events(events_path);
    if (!events) {
      std::cerr << "error: cannot write " << events_path << "\n";
      return kExitUsage;
    }
    events << sim::events_to_jsonl(result.events);
    std::ofstream traj(trajectory_path);
    if (!traj) {
      std::cerr << "error: cannot write " << trajectory_path << "\n";
      return kExitUsage;
    }
    traj << sim::trajectory_to_csv(result.trajectory);
    std::cout << "verdict: " << sim::to_string(result.verdict) << "\n";
    note("events: " + events_path + ", trajectory: " + trajectory_path);
    return result.verdict == sim::ScenarioVerdict::Timeout ? kExitTimeout : kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAuth;
  }
}

int cmd_frame(const std::string& bytes_hex, const std::string& key_hex,
              const std::string& peer_hex) {
  std::vector<uint8_t> wire;
  try {
    wire = from_hex(bytes_hex);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  link::DecodeResult dec = link::decode_frame(wire);
  if (dec.status != link::DecodeStatus::Ok) {
    const char* name = dec.status == link::DecodeStatus::FrameTooShort ? "FrameTooShort"
                       : dec.status == link::DecodeStatus::BadSync     ? "BadSync"
                       : dec.status == link::DecodeStatus::BadChecksum ? "BadChecksum"
                                                                       : "BadFrameType";
    std::cerr << "error: " << name << "\n";
    return kExitUsage;
  }
  const link::SecureFrame& f = dec.frame;
  char line[96];
  std::snprintf(line, sizeof line, "type: %u", unsigned(f.frame_type));
  std::cout << line << "\n";
  std::snprintf(line, sizeof line, "src: 0x%04x", f.src.value);
  std::cout << line << "\n";
  std::snprintf(line, sizeof line, "dst: 0x%04x", f.dst.value);
  std::cout << line << "\n";
  std::snprintf(line, sizeof line, "counter: %u", f.frame_counter);
  std::cout << line << "\n";
  std::cout << "mic: " << to_hex(f.mic.data(), f.mic.size()) << "\n";

  if (key_hex.empty()) return kExitOk;

  std::vector<uint8_t> key_bytes;
  try {
    key_bytes = from_hex(key_hex);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (key_bytes.size() != 16) {
    std::cerr << "error: key must be 16 bytes (32 hex chars)\n";
    return kExitUsage;
  }
  keys::SessionKey key;
  std::copy(key_bytes.begin(), key_bytes.end(), key.bytes.begin());

  uint16_t peer = f.dst.value;  // by default judge the source against nothing
  bool have_peer = !peer_hex.empty();
  if (have_peer) {
    try {
      auto pb = from_hex(peer_hex);
      if (pb.size() != 2) throw ArgumentError("peer address must be 2 bytes");
      peer = uint16_t((pb[0] << 8) | pb[1]);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  link::OpenResult res = link::open(f, key, {peer});
  if (res.status != link::OpenStatus::Ok) {
    std::cerr << "error: BadMic\n";
    return kExitAuth;
  }
  std::cout << "payload_hex: " << to_hex(res.plaintext.data(), res.plaintext.size())
            << "\n";
  bool printable = !res.plaintext.empty();
  for (uint8_t b : res.plaintext)
    if (b < 0x20 || b > 0x7E) printable = false;
  if (printable)
    std::cout << "payload_text: "
              << std::string(res.plaintext.begin(), res.plaintext.end()) << "\n";
  if (have_peer)
    std::cout << "verdict: "
              << (res.verdict == link::SourceVerdict::Trusted ? "Trusted" : "Foreign")
              << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG-derived key generation and secured UAV link tools"};
  app.require_subcommand(1);
  bool no_timestamps = false;
  app.add_flag("--no-timestamps", no_timestamps,
               "suppress timestamps in diagnostics");

  std::string eeg_path, out_path, enrollment_path;
  uint64_t seed = 0;
  unsigned degree = 8;
  double c = 100.0, theta = 4.0;
  std::string code_text;
  bool emit_key_hex = false;
  auto* enroll = app.add_subcommand("enroll", "derive a key and write the public enrollment record");
  enroll->add_option("--eeg", eeg_path, "EEG CSV file")->required();
  enroll->add_option("--out", out_path, "output enrollment file")->required();
  enroll->add_option("--seed", seed, "64-bit enrollment seed")->required();
  enroll->add_option("--degree", degree, "Legendre fit degree (default 8)");
  enroll->add_option("--c", c, "coefficient scale constant (default 100)");
  enroll->add_option("--theta", theta, "mask offset exponent (default 4)");
  enroll->add_option("--code", code_text, "BCH code as n,k (default 127,64)");
  enroll->add_flag("--emit-key-hex", emit_key_hex,
                   "print the session key in hex (testing only)");

  std::string rep_eeg, rep_enrollment;
  double rep_c = 100.0;
  auto* reproduce = app.add_subcommand("reproduce", "re-derive the key from a fresh reading");
  reproduce->add_option("--eeg", rep_eeg, "EEG CSV file")->required();
  reproduce->add_option("--enrollment", rep_enrollment, "enrollment file")->required();
  reproduce->add_option("--c", rep_c, "coefficient scale constant used at enrollment");

  std::string scenario_path, events_path, trajectory_path;
  auto* simulate = app.add_subcommand("simulate", "run a mission scenario");
  simulate->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  simulate->add_option("--events", events_path, "output events JSON-lines file")->required();
  simulate->add_option("--trajectory", trajectory_path, "output trajectory CSV file")->required();

  std::string frame_hex, key_hex, peer_hex;
  auto* frame = app.add_subcommand("frame", "decode (and optionally open) a wire frame");
  frame->add_option("--bytes", frame_hex, "frame bytes in hex")->required();
  frame->add_option("--key", key_hex, "session key in hex (32 chars)");
  frame->add_option("--peer", peer_hex, "expected peer address in hex (4 chars)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  g_timestamps = !no_timestamps;

  if (enroll->parsed())
    return cmd_enroll(eeg_path, out_path, seed, degree, c, theta, code_text,
                      emit_key_hex);
  if (reproduce->parsed()) return cmd_reproduce(rep_eeg, rep_enrollment, rep_c);
  if (simulate->parsed())
    return cmd_simulate(scenario_path, events_path, trajectory_path);
  if (frame->parsed()) return cmd_frame(frame_hex, key_hex, peer_hex);
  return kExitUsage;
}
