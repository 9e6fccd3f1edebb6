// SPDX-License-Identifier: Apache-2.0
//
// BLAKE3 hash (unkeyed mode), ported from the published reference algorithm.
// Supports arbitrary output lengths via the extendable output counter.

#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace keri {

class Blake3 {
 public:
  Blake3();

  void update(std::span<const std::uint8_t> input);
  void finalize(std::span<std::uint8_t> out) const;

  static void hash(std::span<const std::uint8_t> input, std::span<std::uint8_t> out);
  static std::array<std::uint8_t, 32> hash32(std::span<const std::uint8_t> input);

 private:
  struct ChunkState {
    std::array<std::uint32_t, 8> cv;
    std::uint64_t chunk_counter = 0;
    std::array<std::uint8_t, 64> block{};
    std::uint8_t block_len = 0;
    std::uint8_t blocks_compressed = 0;

    std::size_t len() const { return 64 * blocks_compressed + block_len; }
  };

  void add_chunk_cv(std::array<std::uint32_t, 8> cv, std::uint64_t total_chunks);

  ChunkState chunk_;
  std::array<std::array<std::uint32_t, 8>, 54> stack_{};
  std::uint8_t stack_len_ = 0;
};

}  // namespace keri
