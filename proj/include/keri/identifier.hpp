// SPDX-License-Identifier: Apache-2.0
//
// Self-certifying identifier prefixes: basic (the public key itself),
// self-addressing (a digest of the inception data), and self-signing (a
// signature over the inception data). The derivation code declares the class.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keri/event.hpp"
#include "keri/matter.hpp"
#include "keri/threshold.hpp"

namespace keri {

enum class PrefixClass { Basic, SelfAddressing, SelfSigning };

class IdentifierError : public std::runtime_error {
 public:
  enum class Kind {
    NotASigningKey,
    UnregisteredDigestCode,
    KeyMismatch,
    NotAPrefixCode,
  };
  IdentifierError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Prefix {
  QualifiedMaterial qualified;

  std::string text() const { return encode(qualified); }
  PrefixClass prefix_class() const;
  bool transferable() const;

  static Prefix from_text(std::string_view text);
  bool operator==(const Prefix&) const = default;
};

/// True when the code can head an identifier prefix at all.
bool is_prefix_code(std::string_view code) noexcept;
/// Basic prefixes embed the verification key; these never allow rotation.
bool is_nontransferable_code(std::string_view code) noexcept;

struct InceptionSeed {
  SigningThreshold sith = SigningThreshold::integer(1);
  std::vector<std::string> public_keys;  // qualified, non-empty
  std::string next_digest;               // empty marks non-transferable
  std::uint32_t tally = 0;
  std::vector<std::string> witnesses;    // non-transferable prefixes
  std::vector<std::string> config;
  std::optional<LocationSeal> delegator_location;
};

/// Extracted-element text digested (or signed) during derivation: the
/// inception data in event order with the prefix value replaced by a
/// placeholder of '#' repeated to the target qualified length.
std::string derivation_input(const InceptionSeed& seed, std::size_t placeholder_length);

Prefix derive_basic(const QualifiedMaterial& public_key, bool transferable);
Prefix derive_self_addressing(const InceptionSeed& seed, std::string_view digest_code);
/// Single-key seeds only; the secret key must match seed.public_keys[0].
Prefix derive_self_signing(const InceptionSeed& seed,
                           std::span<const std::uint8_t> ed25519_secret_key64);

/// True iff re-deriving (or for self-signing, verifying) the prefix from the
/// seed by its declared class reproduces the prefix exactly.
bool verify_prefix(const Prefix& prefix, const InceptionSeed& seed);

/// The inception event this seed describes, with the given prefix text.
/// Ilk is dip when the seed carries a delegator location, icp otherwise.
KeyEvent inception_event(const InceptionSeed& seed, std::string prefix_text);

}  // namespace keri
