// SPDX-License-Identifier: Apache-2.0
//
// Cipher-suite primitives behind the derivation-code table: digests selected
// by their material code, Ed25519 signing, and seed stretching.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keri/matter.hpp"

namespace keri::crypto {

/// Digest of `data` under a registered digest code (E, F, G, H, I, 0D-0G).
/// Throws CodecError{UnknownCode} for anything else.
std::vector<std::uint8_t> digest(std::string_view digest_code,
                                 std::span<const std::uint8_t> data);

QualifiedMaterial qualified_digest(std::string_view digest_code,
                                   std::span<const std::uint8_t> data);

bool is_digest_code(std::string_view code) noexcept;

struct Ed25519Keypair {
  std::array<std::uint8_t, 32> public_key;
  std::array<std::uint8_t, 64> secret_key;
};

Ed25519Keypair ed25519_from_seed(std::span<const std::uint8_t> seed32);
std::array<std::uint8_t, 64> ed25519_sign(std::span<const std::uint8_t> secret_key64,
                                          std::span<const std::uint8_t> message);
bool ed25519_verify(std::span<const std::uint8_t> public_key32,
                    std::span<const std::uint8_t> signature64,
                    std::span<const std::uint8_t> message);

/// Argon2id stretch of a 16-byte seed to a 32-byte signing seed. Parameters
/// are fixed and public so the stretch is reproducible everywhere.
std::array<std::uint8_t, 32> stretch_seed(std::span<const std::uint8_t> seed16);

std::vector<std::uint8_t> random_bytes(std::size_t n);

}  // namespace keri::crypto
