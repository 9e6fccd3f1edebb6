// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace keri::b64 {

/// URL-safe Base64 alphabet per RFC 4648 section 5.
inline constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

/// Value of a URL-safe Base64 character, or -1 when not in the alphabet.
int value_of(char c) noexcept;

/// Character for a value in [0, 64).
char char_of(unsigned value);

bool is_b64_char(char c) noexcept;

/// Encode bytes; `pad` controls trailing '=' fill to a 4-char boundary.
std::string encode(std::span<const std::uint8_t> raw, bool pad = true);

/// Decode a padded string (length multiple of 4). Throws std::invalid_argument
/// on bad characters, bad length, or non-zero bits under the padding.
std::vector<std::uint8_t> decode(std::string_view text);

}  // namespace keri::b64
