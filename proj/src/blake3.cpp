// SPDX-License-Identifier: Apache-2.0

#include "keri/blake3.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace keri {

namespace {

constexpr std::uint32_t CHUNK_START = 1 << 0;
constexpr std::uint32_t CHUNK_END = 1 << 1;
constexpr std::uint32_t PARENT = 1 << 2;
constexpr std::uint32_t ROOT = 1 << 3;

constexpr std::array<std::uint32_t, 8> IV = {0x6A09E667, 0xBB67AE85, 0x3C6EF372, 0xA54FF53A,
                                             0x510E527F, 0x9B05688C, 0x1F83D9AB, 0x5BE0CD19};

constexpr std::array<std::size_t, 16> MSG_PERMUTATION = {2, 6,  3,  10, 7, 0,  4,  13,
                                                         1, 11, 12, 5,  9, 14, 15, 8};

inline void g(std::array<std::uint32_t, 16>& state, std::size_t a, std::size_t b, std::size_t c,
              std::size_t d, std::uint32_t mx, std::uint32_t my) {
  state[a] = state[a] + state[b] + mx;
  state[d] = std::rotr(state[d] ^ state[a], 16);
  state[c] = state[c] + state[d];
  state[b] = std::rotr(state[b] ^ state[c], 12);
  state[a] = state[a] + state[b] + my;
  state[d] = std::rotr(state[d] ^ state[a], 8);
  state[c] = state[c] + state[d];
  state[b] = std::rotr(state[b] ^ state[c], 7);
}

inline void round_fn(std::array<std::uint32_t, 16>& state, const std::array<std::uint32_t, 16>& m) {
  g(state, 0, 4, 8, 12, m[0], m[1]);
  g(state, 1, 5, 9, 13, m[2], m[3]);
  g(state, 2, 6, 10, 14, m[4], m[5]);
  g(state, 3, 7, 11, 15, m[6], m[7]);
  g(state, 0, 5, 10, 15, m[8], m[9]);
  g(state, 1, 6, 11, 12, m[10], m[11]);
  g(state, 2, 7, 8, 13, m[12], m[13]);
  g(state, 3, 4, 9, 14, m[14], m[15]);
}

std::array<std::uint32_t, 16> compress(const std::array<std::uint32_t, 8>& cv,
                                       const std::array<std::uint32_t, 16>& block_words,
                                       std::uint64_t counter, std::uint32_t block_len,
                                       std::uint32_t flags) {
  std::array<std::uint32_t, 16> state = {cv[0],
                                         cv[1],
                                         cv[2],
                                         cv[3],
                                         cv[4],
                                         cv[5],
                                         cv[6],
                                         cv[7],
                                         IV[0],
                                         IV[1],
                                         IV[2],
                                         IV[3],
                                         static_cast<std::uint32_t>(counter),
                                         static_cast<std::uint32_t>(counter >> 32),
                                         block_len,
                                         flags};
  std::array<std::uint32_t, 16> m = block_words;
  for (int r = 0;; ++r) {
    round_fn(state, m);
    if (r == 6) break;
    std::array<std::uint32_t, 16> permuted;
    for (std::size_t i = 0; i < 16; ++i) permuted[i] = m[MSG_PERMUTATION[i]];
    m = permuted;
  }
  for (std::size_t i = 0; i < 8; ++i) {
    state[i] ^= state[i + 8];
    state[i + 8] ^= cv[i];
  }
  return state;
}

std::array<std::uint32_t, 16> words_from_block(const std::uint8_t* block) {
  std::array<std::uint32_t, 16> words;
  for (std::size_t i = 0; i < 16; ++i) {
    words[i] = static_cast<std::uint32_t>(block[4 * i]) |
               (static_cast<std::uint32_t>(block[4 * i + 1]) << 8) |
               (static_cast<std::uint32_t>(block[4 * i + 2]) << 16) |
               (static_cast<std::uint32_t>(block[4 * i + 3]) << 24);
  }
  return words;
}

// A node ready for its final compression; the ROOT flag and the output
// counter are applied only here, so the tree can grow before finalization.
struct OutputNode {
  std::array<std::uint32_t, 8> cv;
  std::array<std::uint32_t, 16> block_words;
  std::uint64_t counter;
  std::uint32_t block_len;
  std::uint32_t flags;

  std::array<std::uint32_t, 8> chaining_value() const {
    auto out = compress(cv, block_words, counter, block_len, flags);
    std::array<std::uint32_t, 8> cv_out;
    std::copy_n(out.begin(), 8, cv_out.begin());
    return cv_out;
  }

  void root_bytes(std::span<std::uint8_t> out) const {
    std::uint64_t output_counter = 0;
    std::size_t offset = 0;
    while (offset < out.size()) {
      auto words = compress(cv, block_words, output_counter, block_len, flags | ROOT);
      for (std::size_t w = 0; w < 16 && offset < out.size(); ++w) {
        for (int byte = 0; byte < 4 && offset < out.size(); ++byte) {
          out[offset++] = static_cast<std::uint8_t>(words[w] >> (8 * byte));
        }
      }
      ++output_counter;
    }
  }
};

OutputNode parent_node(const std::array<std::uint32_t, 8>& left,
                       const std::array<std::uint32_t, 8>& right) {
  std::array<std::uint32_t, 16> block_words;
  std::copy_n(left.begin(), 8, block_words.begin());
  std::copy_n(right.begin(), 8, block_words.begin() + 8);
  return OutputNode{IV, block_words, 0, 64, PARENT};
}

std::array<std::uint32_t, 8> parent_cv(const std::array<std::uint32_t, 8>& left,
                                       const std::array<std::uint32_t, 8>& right) {
  return parent_node(left, right).chaining_value();
}

std::uint32_t chunk_start_flag(std::uint8_t blocks_compressed) {
  return blocks_compressed == 0 ? CHUNK_START : 0;
}

}  // namespace

Blake3::Blake3() { chunk_.cv = IV; }

void Blake3::add_chunk_cv(std::array<std::uint32_t, 8> cv, std::uint64_t total_chunks) {
  while ((total_chunks & 1) == 0) {
    cv = parent_cv(stack_[--stack_len_], cv);
    total_chunks >>= 1;
  }
  stack_[stack_len_++] = cv;
}

void Blake3::update(std::span<const std::uint8_t> input) {
  std::size_t pos = 0;
  while (pos < input.size()) {
    if (chunk_.len() == 1024) {
      // Chunk complete; fold it into the tree and start the next one.
      auto block_words = words_from_block(chunk_.block.data());
      auto out = compress(chunk_.cv, block_words, chunk_.chunk_counter, chunk_.block_len,
                          chunk_start_flag(chunk_.blocks_compressed) | CHUNK_END);
      std::array<std::uint32_t, 8> cv;
      std::copy_n(out.begin(), 8, cv.begin());
      const std::uint64_t total_chunks = chunk_.chunk_counter + 1;
      add_chunk_cv(cv, total_chunks);
      chunk_ = ChunkState{};
      chunk_.cv = IV;
      chunk_.chunk_counter = total_chunks;
    }
    if (chunk_.block_len == 64 && chunk_.len() < 1024) {
      auto block_words = words_from_block(chunk_.block.data());
      auto out = compress(chunk_.cv, block_words, chunk_.chunk_counter, 64,
                          chunk_start_flag(chunk_.blocks_compressed));
      std::copy_n(out.begin(), 8, chunk_.cv.begin());
      ++chunk_.blocks_compressed;
      chunk_.block.fill(0);
      chunk_.block_len = 0;
    }
    const std::size_t want = std::min<std::size_t>(64 - chunk_.block_len, input.size() - pos);
    std::memcpy(chunk_.block.data() + chunk_.block_len, input.data() + pos, want);
    chunk_.block_len = static_cast<std::uint8_t>(chunk_.block_len + want);
    pos += want;
  }
}

namespace {

OutputNode chunk_output_node(const std::array<std::uint32_t, 8>& cv,
                             const std::array<std::uint8_t, 64>& block, std::uint8_t block_len,
                             std::uint64_t counter, std::uint8_t blocks_compressed) {
  return OutputNode{cv, words_from_block(block.data()), counter, block_len,
                    chunk_start_flag(blocks_compressed) | CHUNK_END};
}

}  // namespace

void Blake3::finalize(std::span<std::uint8_t> out) const {
  OutputNode node = chunk_output_node(chunk_.cv, chunk_.block, chunk_.block_len,
                                      chunk_.chunk_counter, chunk_.blocks_compressed);
  for (int i = stack_len_ - 1; i >= 0; --i) {
    node = parent_node(stack_[static_cast<std::size_t>(i)], node.chaining_value());
  }
  node.root_bytes(out);
}

void Blake3::hash(std::span<const std::uint8_t> input, std::span<std::uint8_t> out) {
  Blake3 hasher;
  hasher.update(input);
  hasher.finalize(out);
}

std::array<std::uint8_t, 32> Blake3::hash32(std::span<const std::uint8_t> input) {
  std::array<std::uint8_t, 32> out;
  hash(input, out);
  return out;
}

}  // namespace keri
