// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <string>
#include <vector>

#include "keri/blake3.hpp"
#include "keri/crypto.hpp"

using namespace keri;

namespace {

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::uint8_t b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 0xF];
  }
  return out;
}

// Official BLAKE3 test pattern: bytes cycle 0, 1, ..., 250, 0, 1, ...
std::vector<std::uint8_t> pattern(std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>(i % 251);
  return out;
}

struct B3Vector {
  std::size_t len;
  const char* hash32;
  const char* hash64;
};

// Frozen from the reference implementation over the official input pattern.
constexpr B3Vector kBlake3Vectors[] = {
    {0, "af1349b9f5f9a1a6a0404dea36dcc9499bcb25c9adc112b7cc9a93cae41f3262",
     "af1349b9f5f9a1a6a0404dea36dcc9499bcb25c9adc112b7cc9a93cae41f3262e00f03e7b69af26b7faaf09fcd333050338ddfe085b8cc869ca98b206c08243a"},
    {1, "2d3adedff11b61f14c886e35afa036736dcd87a74d27b5c1510225d0f592e213",
     "2d3adedff11b61f14c886e35afa036736dcd87a74d27b5c1510225d0f592e213c3a6cb8bf623e20cdb535f8d1a5ffb86342d9c0b64aca3bce1d31f60adfa137b"},
    {3, "e1be4d7a8ab5560aa4199eea339849ba8e293d55ca0a81006726d184519e647f",
     "e1be4d7a8ab5560aa4199eea339849ba8e293d55ca0a81006726d184519e647f5b49b82f805a538c68915c1ae8035c900fd1d4b13902920fd05e1450822f36de"},
    {63, "e9bc37a594daad83be9470df7f7b3798297c3d834ce80ba85d6e207627b7db7b",
     "e9bc37a594daad83be9470df7f7b3798297c3d834ce80ba85d6e207627b7db7b1197012b1e7d9af4d7cb7bdd1f3bb49a90a9b5dec3ea2bbc6eaebce77f4e470c"},
    {64, "4eed7141ea4a5cd4b788606bd23f46e212af9cacebacdc7d1f4c6dc7f2511b98",
     "4eed7141ea4a5cd4b788606bd23f46e212af9cacebacdc7d1f4c6dc7f2511b98fc9cc56cb831ffe33ea8e7e1d1df09b26efd2767670066aa82d023b1dfe8ab1b"},
    {65, "de1e5fa0be70df6d2be8fffd0e99ceaa8eb6e8c93a63f2d8d1c30ecb6b263dee",
     "de1e5fa0be70df6d2be8fffd0e99ceaa8eb6e8c93a63f2d8d1c30ecb6b263dee0e16e0a4749d6811dd1d6d1265c29729b1b75a9ac346cf93f0e1d7296dfcfd43"},
    {1023, "10108970eeda3eb932baac1428c7a2163b0e924c9a9e25b35bba72b28f70bd11",
     "10108970eeda3eb932baac1428c7a2163b0e924c9a9e25b35bba72b28f70bd11a182d27a591b05592b15607500e1e8dd56bc6c7fc063715b7a1d737df5bad333"},
    {1024, "42214739f095a406f3fc83deb889744ac00df831c10daa55189b5d121c855af7",
     "42214739f095a406f3fc83deb889744ac00df831c10daa55189b5d121c855af71cf8107265ecdaf8505b95d8fcec83a98a6a96ea5109d2c179c47a387ffbb404"},
    {1025, "d00278ae47eb27b34faecf67b4fe263f82d5412916c1ffd97c8cb7fb814b8444",
     "d00278ae47eb27b34faecf67b4fe263f82d5412916c1ffd97c8cb7fb814b8444f4c4a22b4b399155358a994e52bf255de60035742ec71bd08ac275a1b51cc6bf"},
    {2048, "e776b6028c7cd22a4d0ba182a8bf62205d2ef576467e838ed6f2529b85fba24a",
     "e776b6028c7cd22a4d0ba182a8bf62205d2ef576467e838ed6f2529b85fba24a9a60bf80001410ec9eea6698cd537939fad4749edd484cb541aced55cd9bf547"},
    {2049, "5f4d72f40d7a5f82b15ca2b2e44b1de3c2ef86c426c95c1af0b6879522563030",
     "5f4d72f40d7a5f82b15ca2b2e44b1de3c2ef86c426c95c1af0b687952256303096de31d71d74103403822a2e0bc1eb193e7aecc9643a76b7bbc0c9f9c52e8783"},
    {3073, "7124b49501012f81cc7f11ca069ec9226cecb8a2c850cfe644e327d22d3e1cd3",
     "7124b49501012f81cc7f11ca069ec9226cecb8a2c850cfe644e327d22d3e1cd39a27ae3b79d68d89da9bf25bc27139ae65a324918a5f9b7828181e52cf373c84"},
    {4096, "015094013f57a5277b59d8475c0501042c0b642e531b0a1c8f58d2163229e969",
     "015094013f57a5277b59d8475c0501042c0b642e531b0a1c8f58d2163229e9690289e9409ddb1b99768eafe1623da896faf7e1114bebeadc1be30829b6f8af70"},
    {8192, "aae792484c8efe4f19e2ca7d371d8c467ffb10748d8a5a1ae579948f718a2a63",
     "aae792484c8efe4f19e2ca7d371d8c467ffb10748d8a5a1ae579948f718a2a635fe51a27db045a567c1ad51be5aa34c01c6651c4d9b5b5ac5d0fd58cf18dd61a"},
};

}  // namespace

TEST_CASE("blake3 reference vectors, 32- and 64-byte outputs") {
  for (const auto& v : kBlake3Vectors) {
    CAPTURE(v.len);
    const auto input = pattern(v.len);
    std::vector<std::uint8_t> out32(32), out64(64);
    Blake3::hash(input, out32);
    Blake3::hash(input, out64);
    CHECK(to_hex(out32) == v.hash32);
    CHECK(to_hex(out64) == v.hash64);
  }
}

TEST_CASE("blake3 incremental updates match one-shot") {
  const auto input = pattern(5000);
  Blake3 hasher;
  std::size_t pos = 0;
  for (std::size_t step : {1, 7, 63, 64, 65, 1000, 1024, 2000, 786}) {
    if (pos >= input.size()) break;
    const std::size_t take = std::min(step, input.size() - pos);
    hasher.update(std::span(input).subspan(pos, take));
    pos += take;
  }
  hasher.update(std::span(input).subspan(pos));
  std::vector<std::uint8_t> inc(32);
  hasher.finalize(inc);
  const auto oneshot = Blake3::hash32(input);
  CHECK(inc == std::vector<std::uint8_t>(oneshot.begin(), oneshot.end()));
}

TEST_CASE("digest dispatch by derivation code") {
  const std::string msg = "abc";
  const std::span<const std::uint8_t> data(reinterpret_cast<const std::uint8_t*>(msg.data()),
                                           msg.size());
  CHECK(to_hex(crypto::digest("E", data)) ==
        "6437b3ac38465133ffb63b75273a8db548c558465d79db03fd359c6cd5bd9d85");
  CHECK(to_hex(crypto::digest("F", data)) ==
        "bddd813c634239723171ef3fee98579b94964e3bb1cb3e427262c8c068d52319");
  CHECK(to_hex(crypto::digest("G", data)) ==
        "508c5e8c327c14e2e1a72ba34eeb452f37458b209ed63a294d999b4c86675982");
  CHECK(to_hex(crypto::digest("H", data)) ==
        "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532");
  CHECK(to_hex(crypto::digest("I", data)) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(to_hex(crypto::digest("0E", data)) ==
        "b751850b1a57168a5693cd924b6b096e08f621827444f70d884f5d0240d2712e"
        "10e116e9192af3c91a7ec57647e3934057340b4cf408d5a56592f8274eec53f0");
  CHECK(to_hex(crypto::digest("0F", data)) ==
        "ba80a53f981c4d0d6a2797b69f12f6e94c212f14685ac4b74b12bb6fdbffa2d1"
        "7d87c5392aab792dc252d5de4533cc9518d38aa8dbf1925ab92386edd4009923");
  CHECK(to_hex(crypto::digest("0G", data)) ==
        "ddaf35a193617abacc417349ae20413112e6fa4e89a97ea20a9eeee64b55d39a"
        "2192992a274fc1a836ba3c23a3feebbd454d4423643ce80e2a9ac94fa54ca49f");

  for (const char* code : {"E", "F", "G", "H", "I"}) CHECK(crypto::digest(code, data).size() == 32);
  for (const char* code : {"0D", "0E", "0F", "0G"}) CHECK(crypto::digest(code, data).size() == 64);

  CHECK_THROWS_AS(crypto::digest("D", data), CodecError);
  CHECK_THROWS_AS(crypto::digest("X", data), CodecError);
  CHECK(crypto::is_digest_code("E"));
  CHECK(!crypto::is_digest_code("D"));
}

TEST_CASE("ed25519 sign and verify") {
  const auto seed = crypto::random_bytes(32);
  const auto kp = crypto::ed25519_from_seed(seed);
  const std::string msg = "hello keri";
  const std::span<const std::uint8_t> data(reinterpret_cast<const std::uint8_t*>(msg.data()),
                                           msg.size());
  const auto sig = crypto::ed25519_sign(kp.secret_key, data);
  CHECK(crypto::ed25519_verify(kp.public_key, sig, data));

  auto bad_sig = sig;
  bad_sig[3] ^= 1;
  CHECK(!crypto::ed25519_verify(kp.public_key, bad_sig, data));

  std::string altered = msg;
  altered[0] ^= 1;
  CHECK(!crypto::ed25519_verify(
      kp.public_key, sig,
      std::span(reinterpret_cast<const std::uint8_t*>(altered.data()), altered.size())));
}

TEST_CASE("ed25519 RFC 8032 test vector 1") {
  auto from_hex = [](std::string_view hex) {
    std::vector<std::uint8_t> out;
    auto nib = [](char c) -> int { return c <= '9' ? c - '0' : c - 'a' + 10; };
    for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
      out.push_back(static_cast<std::uint8_t>(nib(hex[i]) * 16 + nib(hex[i + 1])));
    }
    return out;
  };
  const auto seed = from_hex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60");
  const auto kp = crypto::ed25519_from_seed(seed);
  CHECK(to_hex(kp.public_key) ==
        "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  const auto sig = crypto::ed25519_sign(kp.secret_key, std::span<const std::uint8_t>{});
  CHECK(to_hex(sig) ==
        "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e06522490155"
        "5fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b");
}

TEST_CASE("argon2id stretch is deterministic and seed-sensitive") {
  std::vector<std::uint8_t> seed(16, 0x42);
  const auto a = crypto::stretch_seed(seed);
  const auto b = crypto::stretch_seed(seed);
  CHECK(a == b);
  seed[0] ^= 1;
  CHECK(crypto::stretch_seed(seed) != a);
}
