// SPDX-License-Identifier: Apache-2.0
//
// Controller-side state generator: holds the key sequence, builds signed
// events (inception, rotation, interaction), and generates cooperative
// delegation pairs. The complement of the verifier engine.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "keri/crypto.hpp"
#include "keri/event.hpp"
#include "keri/identifier.hpp"

namespace keri {

/// Deterministic custody of an indexed Ed25519 key sequence: key j derives
/// from BLAKE3(master seed, index). The master seed never leaves the bank.
class KeyBank {
 public:
  explicit KeyBank(std::array<std::uint8_t, 32> master_seed);
  /// Random master seed.
  static KeyBank fresh();
  /// Master from a 16-byte seed via the fixed Argon2id stretch.
  static KeyBank from_short_seed(std::span<const std::uint8_t> seed16);

  crypto::Ed25519Keypair key(std::uint64_t index) const;
  std::string qualified_public(std::uint64_t index, bool transferable = true) const;

  std::array<std::uint8_t, 32> master() const { return master_; }

 private:
  std::array<std::uint8_t, 32> master_;
};

struct SignedEvent {
  KeyEvent event;
  std::vector<std::uint8_t> bytes;
  std::vector<IndexedSignature> signatures;

  std::string framed() const { return frame(bytes, signatures); }
};

struct ControllerConfig {
  std::size_t key_count = 1;          // L_0
  std::size_t next_count = 1;         // L_1; 0 incepts non-transferable use
  std::optional<SigningThreshold> sith;       // defaults to majority
  std::optional<SigningThreshold> next_sith;  // defaults like sith
  std::uint32_t toad = 0;
  std::vector<std::string> witnesses;
  std::vector<std::string> config_traits;
  std::string digest_code = "E";
  SerKind ser_kind = SerKind::JSON;
  /// Basic prefixes embed the key; self-addressing digest the inception data.
  PrefixClass prefix_class = PrefixClass::SelfAddressing;
};

class Controller {
 public:
  /// Creates the identifier and its inception message.
  static Controller incept(KeyBank bank, ControllerConfig config = {},
                           std::optional<LocationSeal> delegator_location = std::nullopt);

  const std::string& prefix() const { return prefix_; }
  std::uint64_t sn() const { return sn_; }
  const std::string& latest_digest() const { return latest_digest_; }
  bool abandoned() const { return next_count_ == 0; }
  std::uint64_t key_index() const { return key_index_; }  // r_l
  std::size_t key_count() const { return key_count_; }    // L_l
  const SignedEvent& inception() const { return inception_; }

  struct RotationSpec {
    std::size_t next_count = 1;  // 0 abandons the identifier
    std::optional<SigningThreshold> sith;       // threshold for the incoming set
    std::optional<SigningThreshold> next_sith;  // commitment for the set after
    std::optional<std::uint32_t> toad;
    std::vector<std::string> cuts;
    std::vector<std::string> adds;
    std::vector<Seal> seals;
  };
  SignedEvent rotate() { return rotate(RotationSpec{}); }
  SignedEvent rotate(const RotationSpec& spec);
  SignedEvent interact(std::vector<Seal> seals);

  /// Signs arbitrary bytes with every current key, indexed.
  std::vector<IndexedSignature> sign(std::span<const std::uint8_t> bytes) const;

  /// Applies an externally supplied next event (used for delegation pairs
  /// where the event was built before completion of its delegating anchor).
  void adopt(const SignedEvent& accepted);

  /// Everything needed to resume control of an existing identifier.
  struct Snapshot {
    std::array<std::uint8_t, 32> master{};
    ControllerConfig config;
    std::string prefix;
    std::uint64_t sn = 0;
    std::string latest_digest;
    std::uint64_t key_index = 0;
    std::size_t key_count = 1;
    std::size_t next_count = 1;
    SigningThreshold sith;
    SigningThreshold next_sith;
  };
  static Controller restore(const Snapshot& snapshot);
  Snapshot snapshot() const;

 private:
  Controller() = default;
  SignedEvent finish(KeyEvent event) const;
  std::vector<std::string> current_keys() const;

  KeyBank bank_{std::array<std::uint8_t, 32>{}};
  ControllerConfig config_;
  std::string prefix_;
  std::uint64_t sn_ = 0;
  std::string latest_digest_;
  std::uint64_t key_index_ = 0;   // r_l: first index of the current set
  std::size_t key_count_ = 1;     // L_l
  std::size_t next_count_ = 1;    // L_{l+1}
  SigningThreshold sith_;
  SigningThreshold next_sith_;
  SignedEvent inception_;
};

enum class DelegationKind { Interaction, Rotation };

struct DelegationPair {
  SignedEvent delegating;  // anchors the delegated event's digest
  SignedEvent delegated;   // carries the delegating event's location seal
};

/// Cooperative delegation, built in the prescribed order: partial delegating
/// event, location seal, complete delegated event, its digest sealed back
/// into the completed delegating event. Apply the delegating event first.
DelegationPair delegate_inception(Controller& delegator, KeyBank delegate_bank,
                                  ControllerConfig delegate_config, DelegationKind kind,
                                  std::optional<Controller>& delegate_out);

/// Delegated rotation of an existing delegate, anchored the same way.
DelegationPair delegate_rotation(Controller& delegator, Controller& delegate,
                                 const Controller::RotationSpec& spec, DelegationKind kind);

}  // namespace keri
