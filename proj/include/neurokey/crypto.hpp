#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace neurokey::crypto {

using Block = std::array<uint8_t, 16>;

// AES-128, encryption direction only (CTR and CMAC never decrypt a block).
class Aes128 {
 public:
  explicit Aes128(const Block& key);
  void encrypt_block(const uint8_t in[16], uint8_t out[16]) const;

 private:
  std::array<uint8_t, 176> round_keys_{};
};

// AES-128-CMAC (RFC 4493), full 16-byte tag.
Block aes_cmac(const Block& key, std::span<const uint8_t> message);

// Counter-mode keystream XOR. The 16-byte counter block is
// prefix (9 bytes) || block index (7 bytes, big-endian); index starts at 0.
void ctr_crypt(const Aes128& aes, const std::array<uint8_t, 9>& prefix,
               std::span<const uint8_t> in, uint8_t* out);

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data);

// Constant-time byte-string comparison.
bool ct_equal(std::span<const uint8_t> a, std::span<const uint8_t> b);

}  // namespace neurokey::crypto
