#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "neurokey/keys.hpp"

namespace neurokey::link {

// 16-bit node address; 0xFFFF is the reserved broadcast address.
struct LinkAddress {
  uint16_t value = 0;
  friend auto operator<=>(const LinkAddress&, const LinkAddress&) = default;
};

enum class FrameType : uint8_t {
  Command = 0x01,
  Telemetry = 0x02,
  KeyChangeRequest = 0x03,
  KeyChangeAck = 0x04,
};

struct SecureFrame {
  LinkAddress src;
  LinkAddress dst;
  uint32_t frame_counter = 0;
  FrameType frame_type = FrameType::Command;
  std::vector<uint8_t> ciphertext;
  std::array<uint8_t, 8> mic{};
  friend bool operator==(const SecureFrame&, const SecureFrame&) = default;
};

enum class SourceVerdict { Trusted, Foreign };
enum class OpenStatus { Ok, BadMic, Replay };

struct OpenResult {
  OpenStatus status = OpenStatus::BadMic;
  SourceVerdict verdict = SourceVerdict::Foreign;
  std::vector<uint8_t> plaintext;  // only populated when status == Ok
};

// AES-128-CTR encryption plus 8-byte CMAC MIC over header || ciphertext.
SecureFrame seal(std::span<const uint8_t> plaintext, FrameType type,
                 LinkAddress src, LinkAddress dst, uint32_t counter,
                 const keys::SessionKey& key);

// MIC verification (constant-time) and decryption. Stateless: replay
// tracking lives in SecureChannel. Foreign frames decrypt normally; the
// verdict tells the failsafe layer who sent them.
OpenResult open(const SecureFrame& frame, const keys::SessionKey& key,
                LinkAddress expected_peer);

enum class DecodeStatus { Ok, FrameTooShort, BadSync, BadChecksum, BadFrameType };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::FrameTooShort;
  SecureFrame frame;
};

// Wire layout (big-endian): 0x7E sync, u16 length (bytes after the length
// field, excluding checksum), u8 type, u16 src, u16 dst, u32 counter,
// ciphertext, 8-byte MIC, u8 checksum = 0xFF - sum(bytes after length).
std::vector<uint8_t> encode_frame(const SecureFrame& frame);
DecodeResult decode_frame(std::span<const uint8_t> bytes);

// Per-endpoint sealing counter and replay tracker. Single-owner object:
// one per link endpoint, not shared across threads.
class SecureChannel {
 public:
  SecureChannel(LinkAddress local, LinkAddress expected_peer, keys::SessionKey key,
                uint64_t start_counter = 0);

  // Seals with the next counter value; throws RekeyRequiredError when the
  // counter space under the current key is exhausted.
  SecureFrame seal_next(FrameType type, LinkAddress dst,
                        std::span<const uint8_t> plaintext);

  // Replay-checked open: frames whose counter is <= the last accepted value
  // from the same source are rejected as Replay.
  OpenResult open(const SecureFrame& frame);

  // Installs a new session key and resets all frame counters to zero.
  void rekey(const keys::SessionKey& key);

  const keys::SessionKey& session_key() const { return key_; }
  LinkAddress local_address() const { return local_; }

 private:
  LinkAddress local_;
  LinkAddress expected_peer_;
  keys::SessionKey key_;
  uint64_t next_counter_ = 0;  // 64-bit so exhaustion at 2^32 is detectable
  std::map<uint16_t, uint32_t> last_seen_;
};

// Application command carried in Command frames.
struct Command {
  enum class Kind : uint8_t { Goto = 1, Hover = 2, ReturnToLaunch = 3, Resume = 4 };
  Kind kind = Kind::Hover;
  // Goto payload
  uint16_t waypoint_index = 0;
  double x = 0.0;
  double y = 0.0;
  bool final_waypoint = false;
  friend bool operator==(const Command&, const Command&) = default;
};

std::vector<uint8_t> encode_command(const Command& cmd);
Command decode_command(std::span<const uint8_t> payload);  // throws ParseError

}  // namespace neurokey::link
