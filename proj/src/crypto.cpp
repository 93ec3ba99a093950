#include "neurokey/crypto.hpp"

#include <cstring>

#include "neurokey/errors.hpp"

namespace neurokey::crypto {

namespace {

// GF(2^8) with the AES reduction polynomial x^8+x^4+x^3+x+1.
inline uint8_t xtime(uint8_t a) {
  return static_cast<uint8_t>((a << 1) ^ ((a & 0x80) ? 0x1B : 0x00));
}

uint8_t gf256_mul(uint8_t a, uint8_t b) {
  uint8_t r = 0;
  while (b) {
    if (b & 1) r ^= a;
    a = xtime(a);
    b >>= 1;
  }
  return r;
}

struct SboxTable {
  std::array<uint8_t, 256> s{};
  SboxTable() {
    // Multiplicative inverses via brute force (init-time only), then the
    // affine transform from the standard.
    for (int x = 0; x < 256; ++x) {
      uint8_t inv = 0;
      if (x != 0) {
        for (int y = 1; y < 256; ++y) {
          if (gf256_mul(static_cast<uint8_t>(x), static_cast<uint8_t>(y)) == 1) {
            inv = static_cast<uint8_t>(y);
            break;
          }
        }
      }
      auto rotl8 = [](uint8_t v, int n) {
        return static_cast<uint8_t>((v << n) | (v >> (8 - n)));
      };
      s[x] = static_cast<uint8_t>(inv ^ rotl8(inv, 1) ^ rotl8(inv, 2) ^
                                  rotl8(inv, 3) ^ rotl8(inv, 4) ^ 0x63);
    }
  }
};

const SboxTable kSbox;

inline uint8_t sbox(uint8_t v) { return kSbox.s[v]; }

}  // namespace

Aes128::Aes128(const Block& key) {
  std::memcpy(round_keys_.data(), key.data(), 16);
  uint8_t rcon = 0x01;
  for (int i = 16; i < 176; i += 4) {
    uint8_t t[4];
    std::memcpy(t, &round_keys_[i - 4], 4);
    if (i % 16 == 0) {
      uint8_t tmp = t[0];
      t[0] = static_cast<uint8_t>(sbox(t[1]) ^ rcon);
      t[1] = sbox(t[2]);
      t[2] = sbox(t[3]);
      t[3] = sbox(tmp);
      rcon = xtime(rcon);
    }
    for (int j = 0; j < 4; ++j)
      round_keys_[i + j] = static_cast<uint8_t>(round_keys_[i - 16 + j] ^ t[j]);
  }
}

void Aes128::encrypt_block(const uint8_t in[16], uint8_t out[16]) const {
  // State stored column-major: s[4*c + r] = state[r][c], matching input order.
  uint8_t s[16];
  for (int i = 0; i < 16; ++i) s[i] = in[i] ^ round_keys_[i];

  for (int round = 1; round <= 10; ++round) {
    uint8_t t[16];
    // SubBytes + ShiftRows fused: row r rotates left by r columns.
    for (int c = 0; c < 4; ++c)
      for (int r = 0; r < 4; ++r) t[4 * c + r] = sbox(s[4 * ((c + r) % 4) + r]);
    if (round < 10) {
      for (int c = 0; c < 4; ++c) {
        uint8_t a0 = t[4 * c], a1 = t[4 * c + 1], a2 = t[4 * c + 2], a3 = t[4 * c + 3];
        s[4 * c + 0] = static_cast<uint8_t>(xtime(a0) ^ xtime(a1) ^ a1 ^ a2 ^ a3);
        s[4 * c + 1] = static_cast<uint8_t>(a0 ^ xtime(a1) ^ xtime(a2) ^ a2 ^ a3);
        s[4 * c + 2] = static_cast<uint8_t>(a0 ^ a1 ^ xtime(a2) ^ xtime(a3) ^ a3);
        s[4 * c + 3] = static_cast<uint8_t>(xtime(a0) ^ a0 ^ a1 ^ a2 ^ xtime(a3));
      }
    } else {
      std::memcpy(s, t, 16);
    }
    for (int i = 0; i < 16; ++i) s[i] ^= round_keys_[16 * round + i];
  }
  std::memcpy(out, s, 16);
}

namespace {

// CMAC subkey derivation: left shift by one bit, conditional xor of 0x87.
Block cmac_dbl(const Block& in) {
  Block out{};
  uint8_t carry = 0;
  for (int i = 15; i >= 0; --i) {
    out[i] = static_cast<uint8_t>((in[i] << 1) | carry);
    carry = static_cast<uint8_t>(in[i] >> 7);
  }
  if (carry) out[15] ^= 0x87;
  return out;
}

}  // namespace

Block aes_cmac(const Block& key, std::span<const uint8_t> message) {
  Aes128 aes(key);
  Block zero{}, l{};
  aes.encrypt_block(zero.data(), l.data());
  Block k1 = cmac_dbl(l);
  Block k2 = cmac_dbl(k1);

  size_t len = message.size();
  size_t nblocks = (len + 15) / 16;
  bool complete = nblocks > 0 && len % 16 == 0;
  if (nblocks == 0) nblocks = 1;

  Block x{};
  for (size_t b = 0; b + 1 < nblocks; ++b) {
    for (int i = 0; i < 16; ++i) x[i] ^= message[16 * b + i];
    aes.encrypt_block(x.data(), x.data());
  }

  Block last{};
  size_t off = 16 * (nblocks - 1);
  if (complete) {
    std::memcpy(last.data(), message.data() + off, 16);
    for (int i = 0; i < 16; ++i) last[i] ^= k1[i];
  } else {
    size_t rem = len - off;
    if (rem > 0) std::memcpy(last.data(), message.data() + off, rem);
    last[rem] = 0x80;
    for (int i = 0; i < 16; ++i) last[i] ^= k2[i];
  }
  for (int i = 0; i < 16; ++i) x[i] ^= last[i];
  aes.encrypt_block(x.data(), x.data());
  return x;
}

void ctr_crypt(const Aes128& aes, const std::array<uint8_t, 9>& prefix,
               std::span<const uint8_t> in, uint8_t* out) {
  uint8_t block[16];
  uint8_t ks[16];
  std::memcpy(block, prefix.data(), 9);
  std::memset(block + 9, 0, 7);
  uint64_t index = 0;
  for (size_t off = 0; off < in.size(); off += 16, ++index) {
    for (int i = 0; i < 7; ++i)
      block[9 + i] = static_cast<uint8_t>(index >> (8 * (6 - i)));
    aes.encrypt_block(block, ks);
    size_t n = std::min<size_t>(16, in.size() - off);
    for (size_t i = 0; i < n; ++i) out[off + i] = in[off + i] ^ ks[i];
  }
}

namespace {

constexpr uint32_t kSha256K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
};

inline uint32_t rotr32(uint32_t v, int n) { return (v >> n) | (v << (32 - n)); }

}  // namespace

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data) {
  uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                   0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};

  uint64_t bitlen = static_cast<uint64_t>(data.size()) * 8;
  // Padded message: data || 0x80 || zeros || 64-bit length.
  size_t padded = ((data.size() + 8) / 64 + 1) * 64;

  auto process = [&](const uint8_t* chunk) {
    uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (uint32_t(chunk[4 * i]) << 24) | (uint32_t(chunk[4 * i + 1]) << 16) |
             (uint32_t(chunk[4 * i + 2]) << 8) | uint32_t(chunk[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      uint32_t s0 = rotr32(w[i - 15], 7) ^ rotr32(w[i - 15], 18) ^ (w[i - 15] >> 3);
      uint32_t s1 = rotr32(w[i - 2], 17) ^ rotr32(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
      uint32_t s1 = rotr32(e, 6) ^ rotr32(e, 11) ^ rotr32(e, 25);
      uint32_t ch = (e & f) ^ (~e & g);
      uint32_t t1 = hh + s1 + ch + kSha256K[i] + w[i];
      uint32_t s0 = rotr32(a, 2) ^ rotr32(a, 13) ^ rotr32(a, 22);
      uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      uint32_t t2 = s0 + maj;
      hh = g; g = f; f = e; e = d + t1;
      d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  };

  uint8_t chunk[64];
  size_t off = 0;
  for (; off + 64 <= data.size(); off += 64) process(data.data() + off);

  size_t rem = data.size() - off;
  std::memset(chunk, 0, 64);
  if (rem > 0) std::memcpy(chunk, data.data() + off, rem);
  chunk[rem] = 0x80;
  if (padded - off == 128) {
    process(chunk);
    std::memset(chunk, 0, 64);
  }
  for (int i = 0; i < 8; ++i)
    chunk[56 + i] = static_cast<uint8_t>(bitlen >> (8 * (7 - i)));
  process(chunk);

  std::array<uint8_t, 32> out{};
  for (int i = 0; i < 8; ++i) {
    out[4 * i] = static_cast<uint8_t>(h[i] >> 24);
    out[4 * i + 1] = static_cast<uint8_t>(h[i] >> 16);
    out[4 * i + 2] = static_cast<uint8_t>(h[i] >> 8);
    out[4 * i + 3] = static_cast<uint8_t>(h[i]);
  }
  return out;
}

bool ct_equal(std::span<const uint8_t> a, std::span<const uint8_t> b) {
  if (a.size() != b.size()) return false;
  volatile uint8_t acc = 0;
  for (size_t i = 0; i < a.size(); ++i) acc = acc | (a[i] ^ b[i]);
  return acc == 0;
}

}  // namespace neurokey::crypto
