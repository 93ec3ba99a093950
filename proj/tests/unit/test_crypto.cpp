#include <doctest.h>

#include <array>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "neurokey/crypto.hpp"

#ifdef NEUROKEY_HAVE_OPENSSL
#include <openssl/evp.h>
#endif

using namespace neurokey;

namespace {

std::vector<uint8_t> unhex(const std::string& s) {
  std::vector<uint8_t> out;
  for (size_t i = 0; i < s.size(); i += 2)
    out.push_back(uint8_t(std::stoul(s.substr(i, 2), nullptr, 16)));
  return out;
}

std::string hex(std::span<const uint8_t> b) {
  static const char* d = "0123456789abcdef";
  std::string out;
  for (uint8_t v : b) {
    out.push_back(d[v >> 4]);
    out.push_back(d[v & 0xF]);
  }
  return out;
}

crypto::Block block_of(const std::string& h) {
  crypto::Block b{};
  auto v = unhex(h);
  std::copy(v.begin(), v.end(), b.begin());
  return b;
}

}  // namespace

TEST_CASE("aes128 FIPS-197 known answer") {
  crypto::Aes128 aes(block_of("000102030405060708090a0b0c0d0e0f"));
  auto pt = unhex("00112233445566778899aabbccddeeff");
  uint8_t ct[16];
  aes.encrypt_block(pt.data(), ct);
  CHECK(hex({ct, 16}) == "69c4e0d86a7b0430d8cdb78070b4c55a");
}

TEST_CASE("aes-cmac RFC 4493 vectors") {
  auto key = block_of("2b7e151628aed2a6abf7158809cf4f3c");
  auto msg = unhex(
      "6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e51"
      "30c81c46a35ce411e5fbc1191a0a52eff69f2445df4f9b17ad2b417be66c3710");
  CHECK(hex(crypto::aes_cmac(key, {})) == "bb1d6929e95937287fa37d129b756746");
  CHECK(hex(crypto::aes_cmac(key, std::span(msg).first(16))) ==
        "070a16b46b4d4144f79bdd9dd04a287c");
  CHECK(hex(crypto::aes_cmac(key, std::span(msg).first(40))) ==
        "dfa66747de9ae63030ca32611497c827");
  CHECK(hex(crypto::aes_cmac(key, msg)) == "51f0bebf7e3b9d92fc49741779363cfe");
}

TEST_CASE("sha256 known answers") {
  auto abc = unhex("616263");
  CHECK(hex(crypto::sha256(abc)) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(hex(crypto::sha256({})) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  std::string two = "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq";
  std::vector<uint8_t> v(two.begin(), two.end());
  CHECK(hex(crypto::sha256(v)) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  // padding boundary cases
  for (size_t len : {55u, 56u, 63u, 64u, 65u}) {
    std::vector<uint8_t> m(len, 0x61);
    CHECK(crypto::sha256(m).size() == 32);
  }
}

TEST_CASE("ctr keystream is per-block and self-inverse") {
  crypto::Aes128 aes(block_of("000102030405060708090a0b0c0d0e0f"));
  std::array<uint8_t, 9> prefix{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<uint8_t> pt(40);
  for (size_t i = 0; i < pt.size(); ++i) pt[i] = uint8_t(i * 7 + 1);
  std::vector<uint8_t> ct(pt.size()), rt(pt.size());
  crypto::ctr_crypt(aes, prefix, pt, ct.data());
  crypto::ctr_crypt(aes, prefix, ct, rt.data());
  CHECK(rt == pt);
  CHECK(ct != pt);

  // manual block construction must agree
  for (int blk = 0; blk < 3; ++blk) {
    uint8_t block[16] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 0, 0, 0, 0, 0, 0, 0};
    block[15] = uint8_t(blk);
    uint8_t ks[16];
    aes.encrypt_block(block, ks);
    for (int i = 0; i < 16; ++i) {
      size_t off = size_t(blk) * 16 + i;
      if (off < pt.size()) CHECK(ct[off] == (pt[off] ^ ks[i]));
    }
  }
}

TEST_CASE("constant-time compare") {
  std::vector<uint8_t> a{1, 2, 3}, b{1, 2, 3}, c{1, 2, 4};
  CHECK(crypto::ct_equal(a, b));
  CHECK(!crypto::ct_equal(a, c));
  CHECK(!crypto::ct_equal(a, std::span(b).first(2)));
}

#ifdef NEUROKEY_HAVE_OPENSSL

TEST_CASE("aes128 agrees with OpenSSL on random blocks") {
  std::mt19937_64 rng(123);
  for (int iter = 0; iter < 200; ++iter) {
    crypto::Block key{};
    uint8_t pt[16], want[16], got[16];
    for (auto& v : key) v = uint8_t(rng());
    for (auto& v : pt) v = uint8_t(rng());

    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    int outl = 0;
    REQUIRE(EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr) == 1);
    EVP_CIPHER_CTX_set_padding(ctx, 0);
    REQUIRE(EVP_EncryptUpdate(ctx, want, &outl, pt, 16) == 1);
    EVP_CIPHER_CTX_free(ctx);

    crypto::Aes128 aes(key);
    aes.encrypt_block(pt, got);
    REQUIRE(std::memcmp(want, got, 16) == 0);
  }
}

TEST_CASE("aes-cmac agrees with OpenSSL on random messages") {
  std::mt19937_64 rng(321);
  for (int iter = 0; iter < 100; ++iter) {
    crypto::Block key{};
    for (auto& v : key) v = uint8_t(rng());
    std::vector<uint8_t> msg(rng() % 120);
    for (auto& v : msg) v = uint8_t(rng());

    EVP_MAC* mac = EVP_MAC_fetch(nullptr, "CMAC", nullptr);
    REQUIRE(mac != nullptr);
    EVP_MAC_CTX* ctx = EVP_MAC_CTX_new(mac);
    char cipher_name[] = "AES-128-CBC";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string("cipher", cipher_name, 0),
        OSSL_PARAM_construct_end()};
    REQUIRE(EVP_MAC_init(ctx, key.data(), key.size(), params) == 1);
    REQUIRE(EVP_MAC_update(ctx, msg.data(), msg.size()) == 1);
    uint8_t want[16];
    size_t outl = 0;
    REQUIRE(EVP_MAC_final(ctx, want, &outl, sizeof want) == 1);
    EVP_MAC_CTX_free(ctx);
    EVP_MAC_free(mac);
    REQUIRE(outl == 16);

    auto got = crypto::aes_cmac(key, msg);
    REQUIRE(std::memcmp(want, got.data(), 16) == 0);
  }
}

TEST_CASE("sha256 agrees with OpenSSL on random messages") {
  std::mt19937_64 rng(555);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<uint8_t> msg(rng() % 300);
    for (auto& v : msg) v = uint8_t(rng());
    uint8_t want[32];
    unsigned outl = 0;
    REQUIRE(EVP_Digest(msg.data(), msg.size(), want, &outl, EVP_sha256(), nullptr) == 1);
    auto got = crypto::sha256(msg);
    REQUIRE(std::memcmp(want, got.data(), 32) == 0);
  }
}

#endif  // NEUROKEY_HAVE_OPENSSL
