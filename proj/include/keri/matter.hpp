// SPDX-License-Identifier: Apache-2.0
//
// Bit-exact codec for qualified cryptographic material: a short derivation
// code prepended to URL-safe Base64 material with the pad characters removed.
// The code declares the cipher suite, the derivation, and the raw length, so
// streams of concatenated items parse unambiguously left to right.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace keri {

enum class MaterialKind {
  Seed,
  PublicKeyNontransferable,
  PublicKey,
  Digest,
  Signature,
  EncryptionKey,
};

struct DerivationCode {
  std::string_view code;             // 1, 2, or 4 characters
  std::size_t raw_size;              // bytes of underlying material
  std::size_t pad_length;            // Base64 pads the raw size implies (0, 1, 2)
  std::size_t qualified_b64_length;  // total characters of the qualified text form
  MaterialKind kind;
  std::string_view description;
};

class CodecError : public std::runtime_error {
 public:
  enum class Kind {
    UnknownCode,
    RawLengthMismatch,
    UnknownSelector,
    Truncated,
    NonBase64,
    LengthMismatchForCode,
    IndexOutOfRange,
    UnknownScheme,
    CountOutOfRange,
    UnsupportedDomain,
  };

  CodecError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// All registered material codes (Tables 14.3, 14.4, 14.5).
std::span<const DerivationCode> material_codes();
/// All registered indexed-signature scheme codes (Tables 14.8, 14.9).
std::span<const DerivationCode> indexed_codes();

/// Exact lookup; nullptr when unregistered.
const DerivationCode* find_material_code(std::string_view code) noexcept;
const DerivationCode* find_indexed_code(std::string_view code) noexcept;

struct QualifiedMaterial {
  std::string code;
  std::vector<std::uint8_t> raw;

  const DerivationCode& derivation() const;
  bool operator==(const QualifiedMaterial&) const = default;
};

/// code + URL-safe Base64 of raw with the pads removed.
std::string encode(const QualifiedMaterial& material);
/// Inverse of encode; consumes the whole string.
QualifiedMaterial decode(std::string_view text);
/// Qualified length of the item starting at text[0], from its code alone.
std::size_t qualified_length_at(std::string_view text);

struct IndexedSignature {
  std::string scheme;  // "A", "B" (2-char codes) or "0A" (4-char, Ed448)
  int index = 0;       // offset into the current public-key list, 0..63
  std::vector<std::uint8_t> raw;

  bool operator==(const IndexedSignature&) const = default;
};

std::string encode_indexed(const IndexedSignature& sig);
IndexedSignature decode_indexed(std::string_view text);
std::size_t indexed_length_at(std::string_view text);

enum class CountKind { AttachedSignatures, AttachedReceiptCouplets };

struct CountCode {
  CountKind kind = CountKind::AttachedSignatures;
  int count = 0;  // 0..4095

  bool operator==(const CountCode&) const = default;
};

/// 4 characters: "-A" then the count in two big-endian Base64 digits.
std::string encode_count(const CountCode& count);
/// The text form does not distinguish the two kinds; the caller supplies the
/// kind from parse context. "-B" (Base2 domain) raises unsupported-domain.
CountCode decode_count(std::string_view text,
                       CountKind kind = CountKind::AttachedSignatures);

}  // namespace keri
