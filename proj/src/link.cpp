#include "neurokey/link.hpp"

#include <cmath>
#include <cstring>

#include "neurokey/crypto.hpp"
#include "neurokey/errors.hpp"

namespace neurokey::link {

namespace {

constexpr uint8_t kSync = 0x7E;
constexpr size_t kHeaderLen = 9;   // type + src + dst + counter
constexpr size_t kMicLen = 8;

// Wire-order header: type, src, dst, counter. Also the MIC preimage prefix.
std::array<uint8_t, 9> frame_header(const SecureFrame& f) {
  return {static_cast<uint8_t>(f.frame_type),
          uint8_t(f.src.value >> 8),  uint8_t(f.src.value),
          uint8_t(f.dst.value >> 8),  uint8_t(f.dst.value),
          uint8_t(f.frame_counter >> 24), uint8_t(f.frame_counter >> 16),
          uint8_t(f.frame_counter >> 8),  uint8_t(f.frame_counter)};
}

// Counter-block prefix: src, dst, counter, type; the remaining 7 bytes hold
// the block index.
std::array<uint8_t, 9> ctr_prefix(const SecureFrame& f) {
  return {uint8_t(f.src.value >> 8),  uint8_t(f.src.value),
          uint8_t(f.dst.value >> 8),  uint8_t(f.dst.value),
          uint8_t(f.frame_counter >> 24), uint8_t(f.frame_counter >> 16),
          uint8_t(f.frame_counter >> 8),  uint8_t(f.frame_counter),
          static_cast<uint8_t>(f.frame_type)};
}

std::array<uint8_t, 8> compute_mic(const SecureFrame& f, const keys::SessionKey& key) {
  auto header = frame_header(f);
  std::vector<uint8_t> buf(header.begin(), header.end());
  buf.insert(buf.end(), f.ciphertext.begin(), f.ciphertext.end());
  auto tag = crypto::aes_cmac(key.bytes, buf);
  std::array<uint8_t, 8> mic{};
  std::memcpy(mic.data(), tag.data(), 8);
  return mic;
}

bool valid_frame_type(uint8_t v) { return v >= 1 && v <= 4; }

}  // namespace

SecureFrame seal(std::span<const uint8_t> plaintext, FrameType type,
                 LinkAddress src, LinkAddress dst, uint32_t counter,
                 const keys::SessionKey& key) {
  SecureFrame f;
  f.src = src;
  f.dst = dst;
  f.frame_counter = counter;
  f.frame_type = type;
  f.ciphertext.resize(plaintext.size());
  // Nonce uniqueness comes from the per-sender frame counter.
  crypto::Aes128 aes(key.bytes);
  crypto::ctr_crypt(aes, ctr_prefix(f), plaintext, f.ciphertext.data());
  f.mic = compute_mic(f, key);
  return f;
}

OpenResult open(const SecureFrame& frame, const keys::SessionKey& key,
                LinkAddress expected_peer) {
  OpenResult res;
  res.verdict = frame.src == expected_peer ? SourceVerdict::Trusted
                                           : SourceVerdict::Foreign;
  auto expect = compute_mic(frame, key);
  if (!crypto::ct_equal(expect, frame.mic)) {
    res.status = OpenStatus::BadMic;
    return res;
  }
  res.status = OpenStatus::Ok;
  res.plaintext.resize(frame.ciphertext.size());
  crypto::Aes128 aes(key.bytes);
  crypto::ctr_crypt(aes, ctr_prefix(frame), frame.ciphertext,
                    res.plaintext.data());
  return res;
}

std::vector<uint8_t> encode_frame(const SecureFrame& frame) {
  size_t body_len = kHeaderLen + frame.ciphertext.size() + kMicLen;
  if (body_len > 0xFFFF) throw ArgumentError("encode_frame: payload too large");
  std::vector<uint8_t> out;
  out.reserve(body_len + 4);
  out.push_back(kSync);
  out.push_back(uint8_t(body_len >> 8));
  out.push_back(uint8_t(body_len));
  auto header = frame_header(frame);
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), frame.ciphertext.begin(), frame.ciphertext.end());
  out.insert(out.end(), frame.mic.begin(), frame.mic.end());
  unsigned sum = 0;
  for (size_t i = 3; i < out.size(); ++i) sum += out[i];
  out.push_back(uint8_t(0xFF - (sum & 0xFF)));
  return out;
}

DecodeResult decode_frame(std::span<const uint8_t> bytes) {
  DecodeResult res;
  if (bytes.size() < 4 + kHeaderLen + kMicLen) {
    res.status = DecodeStatus::FrameTooShort;
    return res;
  }
  if (bytes[0] != kSync) {
    res.status = DecodeStatus::BadSync;
    return res;
  }
  size_t body_len = (size_t(bytes[1]) << 8) | bytes[2];
  if (body_len < kHeaderLen + kMicLen || bytes.size() != 3 + body_len + 1) {
    res.status = DecodeStatus::FrameTooShort;
    return res;
  }
  unsigned sum = 0;
  for (size_t i = 3; i < 3 + body_len; ++i) sum += bytes[i];
  if (uint8_t(0xFF - (sum & 0xFF)) != bytes[3 + body_len]) {
    res.status = DecodeStatus::BadChecksum;
    return res;
  }
  if (!valid_frame_type(bytes[3])) {
    res.status = DecodeStatus::BadFrameType;
    return res;
  }
  SecureFrame& f = res.frame;
  f.frame_type = static_cast<FrameType>(bytes[3]);
  f.src.value = uint16_t((uint16_t(bytes[4]) << 8) | bytes[5]);
  f.dst.value = uint16_t((uint16_t(bytes[6]) << 8) | bytes[7]);
  f.frame_counter = (uint32_t(bytes[8]) << 24) | (uint32_t(bytes[9]) << 16) |
                    (uint32_t(bytes[10]) << 8) | uint32_t(bytes[11]);
  size_t ct_len = body_len - kHeaderLen - kMicLen;
  f.ciphertext.assign(bytes.begin() + 12, bytes.begin() + 12 + ct_len);
  std::memcpy(f.mic.data(), bytes.data() + 12 + ct_len, kMicLen);
  res.status = DecodeStatus::Ok;
  return res;
}

SecureChannel::SecureChannel(LinkAddress local, LinkAddress expected_peer,
                             keys::SessionKey key, uint64_t start_counter)
    : local_(local),
      expected_peer_(expected_peer),
      key_(key),
      next_counter_(start_counter) {}

SecureFrame SecureChannel::seal_next(FrameType type, LinkAddress dst,
                                     std::span<const uint8_t> plaintext) {
  if (next_counter_ > 0xFFFFFFFFull)
    throw RekeyRequiredError("frame counter exhausted under this session key");
  uint32_t counter = uint32_t(next_counter_++);
  return seal(plaintext, type, local_, dst, counter, key_);
}

OpenResult SecureChannel::open(const SecureFrame& frame) {
  OpenResult res = link::open(frame, key_, expected_peer_);
  if (res.status != OpenStatus::Ok) return res;
  auto it = last_seen_.find(frame.src.value);
  if (it != last_seen_.end() && frame.frame_counter <= it->second) {
    res.status = OpenStatus::Replay;
    res.plaintext.clear();
    return res;
  }
  last_seen_[frame.src.value] = frame.frame_counter;
  return res;
}

void SecureChannel::rekey(const keys::SessionKey& key) {
  key_ = key;
  next_counter_ = 0;  // frame counters restart from zero under the new key
  last_seen_.clear();
}

namespace {

void put_f64_be(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 7; i >= 0; --i) out.push_back(uint8_t(bits >> (8 * i)));
}

double get_f64_be(std::span<const uint8_t> in, size_t off) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits = (bits << 8) | in[off + i];
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

std::vector<uint8_t> encode_command(const Command& cmd) {
  std::vector<uint8_t> out;
  out.push_back(static_cast<uint8_t>(cmd.kind));
  if (cmd.kind == Command::Kind::Goto) {
    if (!std::isfinite(cmd.x) || !std::isfinite(cmd.y))
      throw ArgumentError("encode_command: waypoint coordinates must be finite");
    out.push_back(uint8_t(cmd.waypoint_index >> 8));
    out.push_back(uint8_t(cmd.waypoint_index));
    put_f64_be(out, cmd.x);
    put_f64_be(out, cmd.y);
    out.push_back(cmd.final_waypoint ? 1 : 0);
  }
  return out;
}

Command decode_command(std::span<const uint8_t> payload) {
  if (payload.empty()) throw ParseError("command payload empty");
  Command cmd;
  switch (payload[0]) {
    case 1: {
      if (payload.size() != 1 + 2 + 8 + 8 + 1)
        throw ParseError("goto command payload size mismatch");
      cmd.kind = Command::Kind::Goto;
      cmd.waypoint_index = uint16_t((uint16_t(payload[1]) << 8) | payload[2]);
      cmd.x = get_f64_be(payload, 3);
      cmd.y = get_f64_be(payload, 11);
      if (!std::isfinite(cmd.x) || !std::isfinite(cmd.y))
        throw ParseError("goto command has non-finite coordinates");
      cmd.final_waypoint = payload[19] != 0;
      return cmd;
    }
    case 2:
    case 3:
    case 4: {
      if (payload.size() != 1) throw ParseError("command payload size mismatch");
      cmd.kind = static_cast<Command::Kind>(payload[0]);
      return cmd;
    }
    default:
      throw ParseError("unknown command kind");
  }
}

}  // namespace neurokey::link
