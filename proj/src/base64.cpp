// SPDX-License-Identifier: Apache-2.0

#include "keri/base64.hpp"

#include <array>
#include <stdexcept>

namespace keri::b64 {

namespace {

constexpr std::array<signed char, 256> build_inverse() {
  std::array<signed char, 256> table{};
  for (auto& v : table) v = -1;
  for (int i = 0; i < 64; ++i) {
    table[static_cast<unsigned char>(kAlphabet[i])] = static_cast<signed char>(i);
  }
  return table;
}

constexpr auto kInverse = build_inverse();

}  // namespace

int value_of(char c) noexcept { return kInverse[static_cast<unsigned char>(c)]; }

char char_of(unsigned value) {
  if (value >= 64) throw std::invalid_argument("base64 value out of range");
  return kAlphabet[value];
}

bool is_b64_char(char c) noexcept { return value_of(c) >= 0; }

std::string encode(std::span<const std::uint8_t> raw, bool pad) {
  std::string out;
  out.reserve(((raw.size() + 2) / 3) * 4);
  std::size_t i = 0;
  for (; i + 3 <= raw.size(); i += 3) {
    std::uint32_t triple = (static_cast<std::uint32_t>(raw[i]) << 16) |
                           (static_cast<std::uint32_t>(raw[i + 1]) << 8) |
                           raw[i + 2];
    out += kAlphabet[(triple >> 18) & 0x3F];
    out += kAlphabet[(triple >> 12) & 0x3F];
    out += kAlphabet[(triple >> 6) & 0x3F];
    out += kAlphabet[triple & 0x3F];
  }
  const std::size_t rem = raw.size() - i;
  if (rem == 1) {
    std::uint32_t triple = static_cast<std::uint32_t>(raw[i]) << 16;
    out += kAlphabet[(triple >> 18) & 0x3F];
    out += kAlphabet[(triple >> 12) & 0x3F];
    if (pad) out += "==";
  } else if (rem == 2) {
    std::uint32_t triple = (static_cast<std::uint32_t>(raw[i]) << 16) |
                           (static_cast<std::uint32_t>(raw[i + 1]) << 8);
    out += kAlphabet[(triple >> 18) & 0x3F];
    out += kAlphabet[(triple >> 12) & 0x3F];
    out += kAlphabet[(triple >> 6) & 0x3F];
    if (pad) out += '=';
  }
  return out;
}

std::vector<std::uint8_t> decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::size_t pads = 0;
  while (pads < text.size() && text[text.size() - 1 - pads] == '=') ++pads;
  if (pads > 2) throw std::invalid_argument("base64 bad padding");
  const std::size_t body = text.size() - pads;
  std::uint32_t acc = 0;
  int bits = 0;
  for (std::size_t i = 0; i < body; ++i) {
    int v = value_of(text[i]);
    if (v < 0) throw std::invalid_argument("base64 bad character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  // Bits left over under the pad characters must be zero.
  if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) {
    throw std::invalid_argument("base64 non-canonical trailing bits");
  }
  if ((pads == 1 && bits != 2) || (pads == 2 && bits != 4) || (pads == 0 && bits != 0)) {
    throw std::invalid_argument("base64 bad padding");
  }
  return out;
}

}  // namespace keri::b64
