// SPDX-License-Identifier: Apache-2.0

#include "keri/matter.hpp"

#include <array>

#include "keri/base64.hpp"

namespace keri {

namespace {

using MK = MaterialKind;

// Tables 14.3 (one character), 14.4 (two character), 14.5 (four character).
constexpr DerivationCode kMaterialCodes[] = {
    {"A", 32, 1, 44, MK::Seed, "Ed25519 256-bit random seed"},
    {"B", 32, 1, 44, MK::PublicKeyNontransferable, "Ed25519 public key, non-transferable basic"},
    {"C", 32, 1, 44, MK::EncryptionKey, "X25519 public encryption key"},
    {"D", 32, 1, 44, MK::PublicKey, "Ed25519 public key, basic"},
    {"E", 32, 1, 44, MK::Digest, "Blake3-256 digest"},
    {"F", 32, 1, 44, MK::Digest, "Blake2b-256 digest"},
    {"G", 32, 1, 44, MK::Digest, "Blake2s-256 digest"},
    {"H", 32, 1, 44, MK::Digest, "SHA3-256 digest"},
    {"I", 32, 1, 44, MK::Digest, "SHA2-256 digest"},
    {"J", 32, 1, 44, MK::Seed, "ECDSA secp256k1 256-bit seed"},
    {"K", 56, 1, 76, MK::Seed, "Ed448 448-bit random seed"},
    {"L", 56, 1, 76, MK::EncryptionKey, "X448 public encryption key"},
    {"0A", 16, 2, 24, MK::Seed, "128-bit random seed or private key"},
    {"0B", 64, 2, 88, MK::Signature, "Ed25519 signature"},
    {"0C", 64, 2, 88, MK::Signature, "ECDSA secp256k1 signature"},
    {"0D", 64, 2, 88, MK::Digest, "Blake3-512 digest"},
    {"0E", 64, 2, 88, MK::Digest, "SHA3-512 digest"},
    {"0F", 64, 2, 88, MK::Digest, "Blake2b-512 digest"},
    {"0G", 64, 2, 88, MK::Digest, "SHA2-512 digest"},
    {"1AAA", 33, 0, 48, MK::PublicKeyNontransferable, "ECDSA secp256k1 public key, non-transferable basic"},
    {"1AAB", 33, 0, 48, MK::PublicKey, "ECDSA secp256k1 public key, basic"},
    {"1AAC", 57, 0, 80, MK::PublicKeyNontransferable, "Ed448 public key, non-transferable basic"},
    {"1AAD", 57, 0, 80, MK::PublicKey, "Ed448 public key, basic"},
    {"1AAE", 114, 0, 156, MK::Signature, "Ed448 signature"},
};

// Tables 14.8 and 14.9. The stored `code` is the scheme part only; the index
// character(s) complete it. qualified_b64_length covers scheme + index + body.
constexpr DerivationCode kIndexedCodes[] = {
    {"A", 64, 2, 88, MK::Signature, "Ed25519 signature plus index"},
    {"B", 64, 2, 88, MK::Signature, "ECDSA secp256k1 signature plus index"},
    {"0A", 114, 0, 156, MK::Signature, "Ed448 signature plus index"},
};

}  // namespace

std::span<const DerivationCode> material_codes() { return kMaterialCodes; }
std::span<const DerivationCode> indexed_codes() { return kIndexedCodes; }

const DerivationCode* find_material_code(std::string_view code) noexcept {
  for (const auto& entry : kMaterialCodes) {
    if (entry.code == code) return &entry;
  }
  return nullptr;
}

const DerivationCode* find_indexed_code(std::string_view code) noexcept {
  for (const auto& entry : kIndexedCodes) {
    if (entry.code == code) return &entry;
  }
  return nullptr;
}

const DerivationCode& QualifiedMaterial::derivation() const {
  const DerivationCode* entry = find_material_code(code);
  if (!entry) throw CodecError(CodecError::Kind::UnknownCode, "unknown derivation code: " + code);
  return *entry;
}

std::string encode(const QualifiedMaterial& material) {
  const DerivationCode& dc = material.derivation();
  if (material.raw.size() != dc.raw_size) {
    throw CodecError(CodecError::Kind::RawLengthMismatch,
                     "raw length " + std::to_string(material.raw.size()) + " != " +
                         std::to_string(dc.raw_size) + " for code " + material.code);
  }
  std::string out{material.code};
  out += b64::encode(material.raw, /*pad=*/false);
  return out;
}

namespace {

// Resolves the code token at the head of `text` using the Table 14.1
// selectors: '0' two-character codes, '1' four-character codes, '2'..'6'
// reserved longer codes, '-' count codes, anything else a one-character code.
const DerivationCode* resolve_material_head(std::string_view text) {
  if (text.empty()) throw CodecError(CodecError::Kind::Truncated, "empty text");
  const char selector = text[0];
  std::size_t code_len = 1;
  if (selector == '0') {
    code_len = 2;
  } else if (selector == '1') {
    code_len = 4;
  } else if (selector >= '2' && selector <= '6') {
    throw CodecError(CodecError::Kind::UnknownSelector,
                     std::string("reserved selector '") + selector + "' has no registered codes");
  } else if (selector == '-') {
    throw CodecError(CodecError::Kind::UnknownSelector,
                     "count code where qualified material expected");
  }
  if (text.size() < code_len) {
    throw CodecError(CodecError::Kind::Truncated, "text shorter than its derivation code");
  }
  const DerivationCode* entry = find_material_code(text.substr(0, code_len));
  if (!entry) {
    if (code_len == 1) {
      throw CodecError(CodecError::Kind::UnknownSelector,
                       std::string("unregistered code '") + selector + "'");
    }
    throw CodecError(CodecError::Kind::UnknownCode,
                     "unregistered code '" + std::string(text.substr(0, code_len)) + "'");
  }
  return entry;
}

std::vector<std::uint8_t> decode_body(std::string_view body, const DerivationCode& dc,
                                      std::string_view code_for_error) {
  for (char c : body) {
    if (!b64::is_b64_char(c)) {
      throw CodecError(CodecError::Kind::NonBase64,
                       "non-Base64 character in qualified material");
    }
  }
  std::string padded{body};
  padded.append(dc.pad_length, '=');
  std::vector<std::uint8_t> raw;
  try {
    raw = b64::decode(padded);
  } catch (const std::invalid_argument& e) {
    throw CodecError(CodecError::Kind::NonBase64, e.what());
  }
  if (raw.size() != dc.raw_size) {
    throw CodecError(CodecError::Kind::LengthMismatchForCode,
                     "decoded size mismatch for code " + std::string(code_for_error));
  }
  return raw;
}

}  // namespace

QualifiedMaterial decode(std::string_view text) {
  const DerivationCode* dc = resolve_material_head(text);
  if (text.size() < dc->qualified_b64_length) {
    throw CodecError(CodecError::Kind::Truncated,
                     "truncated material for code " + std::string(dc->code));
  }
  if (text.size() != dc->qualified_b64_length) {
    throw CodecError(CodecError::Kind::LengthMismatchForCode,
                     "text length " + std::to_string(text.size()) + " != " +
                         std::to_string(dc->qualified_b64_length) + " for code " +
                         std::string(dc->code));
  }
  std::string_view body = text.substr(dc->code.size());
  return QualifiedMaterial{std::string(dc->code), decode_body(body, *dc, dc->code)};
}

std::size_t qualified_length_at(std::string_view text) {
  return resolve_material_head(text)->qualified_b64_length;
}

std::string encode_indexed(const IndexedSignature& sig) {
  const DerivationCode* dc = find_indexed_code(sig.scheme);
  if (!dc) {
    throw CodecError(CodecError::Kind::UnknownScheme, "unknown signature scheme: " + sig.scheme);
  }
  if (sig.index < 0 || sig.index > 63) {
    throw CodecError(CodecError::Kind::IndexOutOfRange,
                     "signature index " + std::to_string(sig.index) + " not in [0, 63]");
  }
  if (sig.raw.size() != dc->raw_size) {
    throw CodecError(CodecError::Kind::RawLengthMismatch,
                     "signature length mismatch for scheme " + sig.scheme);
  }
  std::string out{sig.scheme};
  if (dc->code.size() == 1) {
    out += b64::char_of(static_cast<unsigned>(sig.index));
  } else {
    // Four-character code: two index characters, big-endian positional.
    out += b64::char_of(static_cast<unsigned>(sig.index) >> 6);
    out += b64::char_of(static_cast<unsigned>(sig.index) & 0x3F);
  }
  out += b64::encode(sig.raw, /*pad=*/false);
  return out;
}

namespace {

const DerivationCode* resolve_indexed_head(std::string_view text) {
  if (text.empty()) throw CodecError(CodecError::Kind::Truncated, "empty signature text");
  const char selector = text[0];
  if (selector == '-') {
    throw CodecError(CodecError::Kind::UnknownSelector,
                     "count code where indexed signature expected");
  }
  std::size_t scheme_len = 1;
  if (selector == '0') scheme_len = 2;
  if (text.size() < scheme_len) {
    throw CodecError(CodecError::Kind::Truncated, "signature text shorter than its code");
  }
  const DerivationCode* entry = find_indexed_code(text.substr(0, scheme_len));
  if (!entry) {
    throw CodecError(CodecError::Kind::UnknownScheme,
                     "unregistered signature scheme '" + std::string(text.substr(0, scheme_len)) + "'");
  }
  return entry;
}

}  // namespace

IndexedSignature decode_indexed(std::string_view text) {
  const DerivationCode* dc = resolve_indexed_head(text);
  if (text.size() < dc->qualified_b64_length) {
    throw CodecError(CodecError::Kind::Truncated,
                     "truncated indexed signature for scheme " + std::string(dc->code));
  }
  if (text.size() != dc->qualified_b64_length) {
    throw CodecError(CodecError::Kind::LengthMismatchForCode,
                     "indexed signature length mismatch for scheme " + std::string(dc->code));
  }
  const std::size_t index_chars = dc->code.size() == 1 ? 1 : 2;
  int index = 0;
  for (std::size_t i = 0; i < index_chars; ++i) {
    int v = b64::value_of(text[dc->code.size() + i]);
    if (v < 0) throw CodecError(CodecError::Kind::NonBase64, "bad index character");
    index = (index << 6) | v;
  }
  if (index > 63) {
    throw CodecError(CodecError::Kind::IndexOutOfRange,
                     "signature index " + std::to_string(index) + " not in [0, 63]");
  }
  std::string_view body = text.substr(dc->code.size() + index_chars);
  return IndexedSignature{std::string(dc->code), index, decode_body(body, *dc, dc->code)};
}

std::size_t indexed_length_at(std::string_view text) {
  return resolve_indexed_head(text)->qualified_b64_length;
}

std::string encode_count(const CountCode& count) {
  if (count.count < 0 || count.count > 4095) {
    throw CodecError(CodecError::Kind::CountOutOfRange,
                     "count " + std::to_string(count.count) + " not in [0, 4095]");
  }
  std::string out = "-A";
  out += b64::char_of(static_cast<unsigned>(count.count) >> 6);
  out += b64::char_of(static_cast<unsigned>(count.count) & 0x3F);
  return out;
}

CountCode decode_count(std::string_view text, CountKind kind) {
  if (text.size() < 4) throw CodecError(CodecError::Kind::Truncated, "count code shorter than 4");
  if (text.size() != 4) {
    throw CodecError(CodecError::Kind::LengthMismatchForCode, "count code must be 4 characters");
  }
  if (text.substr(0, 2) == "-B") {
    throw CodecError(CodecError::Kind::UnsupportedDomain,
                     "Base2 domain count codes are not supported in text streams");
  }
  if (text.substr(0, 2) != "-A") {
    throw CodecError(CodecError::Kind::UnknownSelector,
                     "not a count code: '" + std::string(text.substr(0, 2)) + "'");
  }
  int hi = b64::value_of(text[2]);
  int lo = b64::value_of(text[3]);
  if (hi < 0 || lo < 0) throw CodecError(CodecError::Kind::NonBase64, "bad count character");
  return CountCode{kind, (hi << 6) | lo};
}

}  // namespace keri
