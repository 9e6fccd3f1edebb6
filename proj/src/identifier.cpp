// SPDX-License-Identifier: Apache-2.0

#include "keri/identifier.hpp"

#include <algorithm>

#include "keri/crypto.hpp"

namespace keri {

namespace {

struct BasicPair {
  std::string_view transferable;
  std::string_view nontransferable;
};

// Signing-key codes and their prefix counterparts per cipher suite.
constexpr BasicPair kBasicPairs[] = {
    {"D", "B"},        // Ed25519
    {"1AAB", "1AAA"},  // ECDSA secp256k1
    {"1AAD", "1AAC"},  // Ed448
};

constexpr std::string_view kSelfSigningCodes[] = {"0B", "0C", "1AAE"};

const BasicPair* basic_pair_for(std::string_view code) {
  for (const auto& pair : kBasicPairs) {
    if (pair.transferable == code || pair.nontransferable == code) return &pair;
  }
  return nullptr;
}

}  // namespace

bool is_prefix_code(std::string_view code) noexcept {
  if (basic_pair_for(code)) return true;
  if (crypto::is_digest_code(code)) return true;
  return std::find(std::begin(kSelfSigningCodes), std::end(kSelfSigningCodes), code) !=
         std::end(kSelfSigningCodes);
}

bool is_nontransferable_code(std::string_view code) noexcept {
  for (const auto& pair : kBasicPairs) {
    if (pair.nontransferable == code) return true;
  }
  return false;
}

PrefixClass Prefix::prefix_class() const {
  const std::string& code = qualified.code;
  if (basic_pair_for(code)) return PrefixClass::Basic;
  if (crypto::is_digest_code(code)) return PrefixClass::SelfAddressing;
  if (std::find(std::begin(kSelfSigningCodes), std::end(kSelfSigningCodes), code) !=
      std::end(kSelfSigningCodes)) {
    return PrefixClass::SelfSigning;
  }
  throw IdentifierError(IdentifierError::Kind::NotAPrefixCode,
                        "code '" + code + "' cannot head an identifier prefix");
}

bool Prefix::transferable() const {
  (void)prefix_class();
  return !is_nontransferable_code(qualified.code);
}

Prefix Prefix::from_text(std::string_view text) {
  Prefix p{decode(text)};
  (void)p.prefix_class();  // validate
  return p;
}

std::string derivation_input(const InceptionSeed& seed, std::size_t placeholder_length) {
  Extractor ex;
  ex.add(std::string(placeholder_length, '#'));
  ex.add(sn_text(0));
  ex.add(ilk_token(seed.delegator_location ? Ilk::dip : Ilk::icp));
  ex.add(seed.sith.extract_text());
  ex.add_list(seed.public_keys);
  ex.add(seed.next_digest);
  ex.add(std::to_string(seed.tally));
  ex.add_list(seed.witnesses);
  ex.add_list(seed.config);
  if (seed.delegator_location) {
    std::string seal_text;
    seal_extract(Seal{*seed.delegator_location}, seal_text);
    ex.add(seal_text);
  }
  return ex.text();
}

Prefix derive_basic(const QualifiedMaterial& public_key, bool transferable) {
  const BasicPair* pair = basic_pair_for(public_key.code);
  if (!pair) {
    throw IdentifierError(IdentifierError::Kind::NotASigningKey,
                          "code '" + public_key.code + "' is not a registered signing key");
  }
  Prefix p;
  p.qualified.code = std::string(transferable ? pair->transferable : pair->nontransferable);
  p.qualified.raw = public_key.raw;
  return p;
}

Prefix derive_self_addressing(const InceptionSeed& seed, std::string_view digest_code) {
  if (!crypto::is_digest_code(digest_code)) {
    throw IdentifierError(IdentifierError::Kind::UnregisteredDigestCode,
                          "not a registered digest code: " + std::string(digest_code));
  }
  const DerivationCode& dc = *find_material_code(digest_code);
  const std::string input = derivation_input(seed, dc.qualified_b64_length);
  Prefix p;
  p.qualified.code = std::string(digest_code);
  p.qualified.raw = crypto::digest(
      digest_code, std::span(reinterpret_cast<const std::uint8_t*>(input.data()), input.size()));
  return p;
}

Prefix derive_self_signing(const InceptionSeed& seed,
                           std::span<const std::uint8_t> ed25519_secret_key64) {
  if (seed.public_keys.size() != 1) {
    throw IdentifierError(IdentifierError::Kind::KeyMismatch,
                          "self-signing derivation requires a single-key seed");
  }
  const QualifiedMaterial pk = decode(seed.public_keys.front());
  const std::string input = derivation_input(seed, find_material_code("0B")->qualified_b64_length);
  const auto sig = crypto::ed25519_sign(
      ed25519_secret_key64,
      std::span(reinterpret_cast<const std::uint8_t*>(input.data()), input.size()));
  if (!crypto::ed25519_verify(pk.raw, sig,
                              std::span(reinterpret_cast<const std::uint8_t*>(input.data()),
                                        input.size()))) {
    throw IdentifierError(IdentifierError::Kind::KeyMismatch,
                          "private key does not correspond to the seed's public key");
  }
  Prefix p;
  p.qualified.code = "0B";
  p.qualified.raw.assign(sig.begin(), sig.end());
  return p;
}

bool verify_prefix(const Prefix& prefix, const InceptionSeed& seed) {
  PrefixClass cls;
  try {
    cls = prefix.prefix_class();
  } catch (const IdentifierError&) {
    return false;
  }
  try {
    switch (cls) {
      case PrefixClass::Basic: {
        if (seed.public_keys.size() != 1) return false;
        const QualifiedMaterial pk = decode(seed.public_keys.front());
        return derive_basic(pk, prefix.transferable()) == prefix &&
               prefix.qualified.raw == pk.raw;
      }
      case PrefixClass::SelfAddressing: {
        // A delegated prefix binds the delegator location into the digest; a
        // seed without one cannot reproduce it.
        return derive_self_addressing(seed, prefix.qualified.code) == prefix;
      }
      case PrefixClass::SelfSigning: {
        if (seed.public_keys.size() != 1 || prefix.qualified.code != "0B") return false;
        const QualifiedMaterial pk = decode(seed.public_keys.front());
        const std::string input =
            derivation_input(seed, prefix.qualified.derivation().qualified_b64_length);
        return crypto::ed25519_verify(
            pk.raw, prefix.qualified.raw,
            std::span(reinterpret_cast<const std::uint8_t*>(input.data()), input.size()));
      }
    }
  } catch (const std::exception&) {
    return false;
  }
  return false;
}

KeyEvent inception_event(const InceptionSeed& seed, std::string prefix_text) {
  KeyEvent event;
  event.prefix = std::move(prefix_text);
  event.sn = 0;
  event.ilk = seed.delegator_location ? Ilk::dip : Ilk::icp;
  event.sith = seed.sith;
  event.keys = seed.public_keys;
  event.next_digest = seed.next_digest;
  event.toad = seed.tally;
  event.wits = seed.witnesses;
  event.cnfg = seed.config;
  event.delegator_seal = seed.delegator_location;
  return event;
}

}  // namespace keri
