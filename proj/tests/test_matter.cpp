// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <string>

#include "keri/base64.hpp"
#include "keri/matter.hpp"

using namespace keri;

namespace {

// Independent reference Base64 encoder: builds the bit string by hand and
// chunks it into 6-bit groups. Deliberately shares nothing with keri::b64.
std::string oracle_b64(const std::vector<std::uint8_t>& raw) {
  std::string bits;
  for (std::uint8_t byte : raw) {
    for (int i = 7; i >= 0; --i) bits += ((byte >> i) & 1) ? '1' : '0';
  }
  while (bits.size() % 6 != 0) bits += '0';
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 6) {
    int v = 0;
    for (std::size_t j = 0; j < 6; ++j) v = v * 2 + (bits[i + j] - '0');
    out += b64::kAlphabet[v];
  }
  while (out.size() % 4 != 0) out += '=';
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    auto nib = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      return c - 'a' + 10;
    };
    out.push_back(static_cast<std::uint8_t>(nib(hex[i]) * 16 + nib(hex[i + 1])));
  }
  return out;
}

std::vector<std::uint8_t> random_raw(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

}  // namespace

TEST_CASE("table invariants: code length replaces exactly the pads") {
  for (const auto& dc : material_codes()) {
    CAPTURE(std::string(dc.code));
    // 1-char codes pair with pad 1, 2-char with pad 2, 4-char with pad 0.
    if (dc.code.size() == 1) CHECK(dc.pad_length == 1);
    if (dc.code.size() == 2) CHECK(dc.pad_length == 2);
    if (dc.code.size() == 4) CHECK(dc.pad_length == 0);
    // Pad count follows from the raw size.
    const std::size_t rem = dc.raw_size % 3;
    const std::size_t pads = rem == 0 ? 0 : 3 - rem;
    CHECK(dc.pad_length == pads);
    CHECK(dc.qualified_b64_length % 4 == 0);
    const std::size_t b64_len = 4 * ((dc.raw_size + 2) / 3);
    CHECK(dc.qualified_b64_length == b64_len + (dc.pad_length == 0 ? 4 : 0));
  }
}

TEST_CASE("prefix-free parsing: no 1-char code is a selector") {
  const std::string selectors = "0123456-";
  for (const auto& dc : material_codes()) {
    if (dc.code.size() == 1) {
      CHECK(selectors.find(dc.code[0]) == std::string::npos);
    } else {
      CHECK(selectors.find(dc.code[0]) != std::string::npos);
    }
  }
}

TEST_CASE("encode: all-zero Ed25519 seed is 44 'A' characters") {
  QualifiedMaterial m{"A", std::vector<std::uint8_t>(32, 0)};
  const std::string text = encode(m);
  CHECK(text == std::string(44, 'A'));
}

TEST_CASE("encode: 32-byte key under 'D' gives 44 chars starting 'D'") {
  std::mt19937_64 rng(7);
  QualifiedMaterial m{"D", random_raw(rng, 32)};
  const std::string text = encode(m);
  CHECK(text.size() == 44);
  CHECK(text[0] == 'D');
}

TEST_CASE("encode: 64-byte signature under '0B' gives 88 chars") {
  std::mt19937_64 rng(8);
  QualifiedMaterial m{"0B", random_raw(rng, 64)};
  const std::string text = encode(m);
  CHECK(text.size() == 88);
  CHECK(text.substr(0, 2) == "0B");
}

TEST_CASE("encode: the worked 32-byte value from the derivation example") {
  // Reference Base64 computed with the independent oracle below and frozen.
  const auto raw = from_hex("0caac9c64711f66e6ed71b37dc5e69c5124fe93ee12446e1a47ad4b650dd861d");
  REQUIRE(raw.size() == 32);
  const std::string padded = oracle_b64(raw);
  CHECK(padded == "DKrJxkcR9m5u1xs33F5pxRJP6T7hJEbhpHrUtlDdhh0=");
  QualifiedMaterial m{"D", raw};
  const std::string text = encode(m);
  CHECK(text.size() == 44);
  CHECK(text == "D" + padded.substr(0, 43));
}

TEST_CASE("encode matches the independent Base64 oracle for every code") {
  std::mt19937_64 rng(12345);
  for (const auto& dc : material_codes()) {
    auto raw = random_raw(rng, dc.raw_size);
    QualifiedMaterial m{std::string(dc.code), raw};
    const std::string text = encode(m);
    const std::string reference = oracle_b64(raw);
    CHECK(text.substr(dc.code.size()) ==
          reference.substr(0, reference.size() - dc.pad_length));
  }
}

TEST_CASE("decode: 44 'A's give the zero Ed25519 seed") {
  const QualifiedMaterial m = decode(std::string(44, 'A'));
  CHECK(m.code == "A");
  CHECK(m.raw == std::vector<std::uint8_t>(32, 0));
}

TEST_CASE("decode: '0A' plus 22 'A's gives 16 zero bytes") {
  const QualifiedMaterial m = decode("0A" + std::string(22, 'A'));
  CHECK(m.code == "0A");
  CHECK(m.raw == std::vector<std::uint8_t>(16, 0));
}

TEST_CASE("decode: unregistered selector errors") {
  CHECK_THROWS_WITH_AS(decode("Z" + std::string(43, 'A')), doctest::Contains("unregistered"),
                       CodecError);
  try {
    decode("Z" + std::string(43, 'A'));
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::UnknownSelector);
  }
}

TEST_CASE("decode error taxonomy") {
  CHECK_THROWS_AS(decode(""), CodecError);
  // reserved selectors '2'-'6'
  try {
    decode("2AAA");
    FAIL("expected throw");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::UnknownSelector);
  }
  // truncated
  try {
    decode("D" + std::string(20, 'A'));
    FAIL("expected throw");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::Truncated);
  }
  // trailing garbage
  try {
    decode("D" + std::string(44, 'A'));
    FAIL("expected throw");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::LengthMismatchForCode);
  }
  // non-Base64 character
  try {
    decode("D" + std::string(42, 'A') + "=");
    FAIL("expected throw");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::NonBase64);
  }
  // unregistered 2-char code
  try {
    decode("0Z" + std::string(86, 'A'));
    FAIL("expected throw");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::UnknownCode);
  }
  // raw length mismatch on encode
  try {
    encode(QualifiedMaterial{"D", std::vector<std::uint8_t>(31, 0)});
    FAIL("expected throw");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::RawLengthMismatch);
  }
}

TEST_CASE("round trip property: every registered code, 1e4 random cases") {
  std::mt19937_64 rng(2024);
  for (const auto& dc : material_codes()) {
    CAPTURE(std::string(dc.code));
    for (int i = 0; i < 10000; ++i) {
      QualifiedMaterial m{std::string(dc.code), random_raw(rng, dc.raw_size)};
      const std::string text = encode(m);
      REQUIRE(text.size() == dc.qualified_b64_length);
      REQUIRE(text.size() % 4 == 0);
      const QualifiedMaterial back = decode(text);
      REQUIRE(back == m);
    }
  }
}

TEST_CASE("concatenated qualified items parse unambiguously left to right") {
  std::mt19937_64 rng(99);
  std::string stream;
  std::vector<QualifiedMaterial> items;
  for (const auto& dc : material_codes()) {
    items.push_back(QualifiedMaterial{std::string(dc.code), random_raw(rng, dc.raw_size)});
    stream += encode(items.back());
  }
  std::size_t pos = 0;
  for (const auto& expected : items) {
    const std::size_t len = qualified_length_at(std::string_view(stream).substr(pos));
    const QualifiedMaterial got = decode(std::string_view(stream).substr(pos, len));
    CHECK(got == expected);
    pos += len;
  }
  CHECK(pos == stream.size());
}

TEST_CASE("indexed signatures") {
  std::mt19937_64 rng(5);

  SUBCASE("index 0 with zero body") {
    IndexedSignature sig{"A", 0, std::vector<std::uint8_t>(64, 0)};
    CHECK(encode_indexed(sig) == "AA" + std::string(86, 'A'));
  }
  SUBCASE("index 2 encodes as 'C'") {
    IndexedSignature sig{"A", 2, random_raw(rng, 64)};
    const std::string text = encode_indexed(sig);
    CHECK(text.size() == 88);
    CHECK(text.substr(0, 2) == "AC");
    CHECK(decode_indexed(text) == sig);
  }
  SUBCASE("Ed448 four-character code totals 156") {
    IndexedSignature sig{"0A", 0, random_raw(rng, 114)};
    const std::string text = encode_indexed(sig);
    CHECK(text.size() == 156);
    CHECK(text.substr(0, 2) == "0A");
    CHECK(decode_indexed(text) == sig);
  }
  SUBCASE("index out of range") {
    IndexedSignature sig{"A", 64, std::vector<std::uint8_t>(64, 0)};
    try {
      encode_indexed(sig);
      FAIL("expected throw");
    } catch (const CodecError& e) {
      CHECK(e.kind() == CodecError::Kind::IndexOutOfRange);
    }
  }
  SUBCASE("unknown scheme") {
    try {
      encode_indexed(IndexedSignature{"Q", 0, std::vector<std::uint8_t>(64, 0)});
      FAIL("expected throw");
    } catch (const CodecError& e) {
      CHECK(e.kind() == CodecError::Kind::UnknownScheme);
    }
  }
  SUBCASE("round trip over all schemes and indices") {
    for (const auto& dc : indexed_codes()) {
      for (int index = 0; index < 64; ++index) {
        IndexedSignature sig{std::string(dc.code), index, random_raw(rng, dc.raw_size)};
        CHECK(decode_indexed(encode_indexed(sig)) == sig);
      }
    }
  }
}

TEST_CASE("count codes") {
  CHECK(encode_count({CountKind::AttachedSignatures, 0}) == "-AAA");
  CHECK(encode_count({CountKind::AttachedSignatures, 1}) == "-AAB");
  CHECK(encode_count({CountKind::AttachedSignatures, 4095}) == "-A__");

  for (int count : {0, 1, 2, 63, 64, 65, 4094, 4095}) {
    const CountCode c{CountKind::AttachedReceiptCouplets, count};
    CHECK(decode_count(encode_count(c), CountKind::AttachedReceiptCouplets) == c);
  }

  try {
    encode_count({CountKind::AttachedSignatures, 4096});
    FAIL("expected throw");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::CountOutOfRange);
  }
  // Base2 domain is registered but unsupported in text streams.
  try {
    decode_count("-BAA");
    FAIL("expected throw");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::UnsupportedDomain);
  }
}
