// SPDX-License-Identifier: Apache-2.0

#include "keri/crypto.hpp"

#include <openssl/evp.h>
#include <sodium.h>

#include <mutex>
#include <stdexcept>

#include "keri/blake3.hpp"

namespace keri::crypto {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
  });
}

std::vector<std::uint8_t> evp_digest(const char* name, std::span<const std::uint8_t> data) {
  const EVP_MD* md = EVP_get_digestbyname(name);
  if (!md) throw std::runtime_error(std::string("digest unavailable: ") + name);
  std::vector<std::uint8_t> out(EVP_MD_get_size(md));
  unsigned int written = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, out.data(), &written) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error(std::string("digest failed: ") + name);
  }
  EVP_MD_CTX_free(ctx);
  out.resize(written);
  return out;
}

std::vector<std::uint8_t> blake2b(std::size_t outlen, std::span<const std::uint8_t> data) {
  ensure_sodium();
  std::vector<std::uint8_t> out(outlen);
  crypto_generichash(out.data(), outlen, data.data(), data.size(), nullptr, 0);
  return out;
}

std::vector<std::uint8_t> blake3(std::size_t outlen, std::span<const std::uint8_t> data) {
  std::vector<std::uint8_t> out(outlen);
  Blake3::hash(data, out);
  return out;
}

}  // namespace

bool is_digest_code(std::string_view code) noexcept {
  const DerivationCode* dc = find_material_code(code);
  return dc != nullptr && dc->kind == MaterialKind::Digest;
}

std::vector<std::uint8_t> digest(std::string_view digest_code,
                                 std::span<const std::uint8_t> data) {
  if (digest_code == "E") return blake3(32, data);
  if (digest_code == "F") return blake2b(32, data);
  if (digest_code == "G") return evp_digest("BLAKE2s256", data);
  if (digest_code == "H") return evp_digest("SHA3-256", data);
  if (digest_code == "I") return evp_digest("SHA256", data);
  if (digest_code == "0D") return blake3(64, data);
  if (digest_code == "0E") return evp_digest("SHA3-512", data);
  if (digest_code == "0F") return blake2b(64, data);
  if (digest_code == "0G") return evp_digest("SHA512", data);
  throw CodecError(CodecError::Kind::UnknownCode,
                   "not a registered digest code: " + std::string(digest_code));
}

QualifiedMaterial qualified_digest(std::string_view digest_code,
                                   std::span<const std::uint8_t> data) {
  return QualifiedMaterial{std::string(digest_code), digest(digest_code, data)};
}

Ed25519Keypair ed25519_from_seed(std::span<const std::uint8_t> seed32) {
  ensure_sodium();
  if (seed32.size() != crypto_sign_SEEDBYTES) {
    throw std::invalid_argument("Ed25519 seed must be 32 bytes");
  }
  Ed25519Keypair kp{};
  crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed32.data());
  return kp;
}

std::array<std::uint8_t, 64> ed25519_sign(std::span<const std::uint8_t> secret_key64,
                                          std::span<const std::uint8_t> message) {
  ensure_sodium();
  if (secret_key64.size() != crypto_sign_SECRETKEYBYTES) {
    throw std::invalid_argument("Ed25519 secret key must be 64 bytes");
  }
  std::array<std::uint8_t, 64> sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_key64.data());
  return sig;
}

bool ed25519_verify(std::span<const std::uint8_t> public_key32,
                    std::span<const std::uint8_t> signature64,
                    std::span<const std::uint8_t> message) {
  ensure_sodium();
  if (public_key32.size() != crypto_sign_PUBLICKEYBYTES || signature64.size() != 64) return false;
  return crypto_sign_verify_detached(signature64.data(), message.data(), message.size(),
                                     public_key32.data()) == 0;
}

std::array<std::uint8_t, 32> stretch_seed(std::span<const std::uint8_t> seed16) {
  ensure_sodium();
  if (seed16.size() != 16) throw std::invalid_argument("stretch input must be 16 bytes");
  std::array<std::uint8_t, 32> out{};
  // Fixed public parameters; the salt carries no secret, the seed does.
  std::array<std::uint8_t, crypto_pwhash_SALTBYTES> salt{};
  if (crypto_pwhash(out.data(), out.size(), reinterpret_cast<const char*>(seed16.data()),
                    seed16.size(), salt.data(), 2 /*opslimit*/, 64 * 1024 * 1024 /*memlimit*/,
                    crypto_pwhash_ALG_ARGON2ID13) != 0) {
    throw std::runtime_error("argon2id stretch failed");
  }
  return out;
}

std::vector<std::uint8_t> random_bytes(std::size_t n) {
  ensure_sodium();
  std::vector<std::uint8_t> out(n);
  randombytes_buf(out.data(), n);
  return out;
}

}  // namespace keri::crypto
