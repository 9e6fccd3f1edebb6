// SPDX-License-Identifier: Apache-2.0

#include "keri/controller.hpp"

#include <cstring>
#include <stdexcept>

#include "keri/blake3.hpp"

namespace keri {

KeyBank::KeyBank(std::array<std::uint8_t, 32> master_seed) : master_(master_seed) {}

KeyBank KeyBank::fresh() {
  const auto bytes = crypto::random_bytes(32);
  std::array<std::uint8_t, 32> seed{};
  std::copy(bytes.begin(), bytes.end(), seed.begin());
  return KeyBank(seed);
}

KeyBank KeyBank::from_short_seed(std::span<const std::uint8_t> seed16) {
  return KeyBank(crypto::stretch_seed(seed16));
}

crypto::Ed25519Keypair KeyBank::key(std::uint64_t index) const {
  std::array<std::uint8_t, 40> input{};
  std::memcpy(input.data(), master_.data(), 32);
  for (int i = 0; i < 8; ++i) {
    input[32 + static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(index >> (8 * (7 - i)));
  }
  const auto seed = Blake3::hash32(input);
  return crypto::ed25519_from_seed(seed);
}

std::string KeyBank::qualified_public(std::uint64_t index, bool transferable) const {
  const auto kp = key(index);
  return encode(QualifiedMaterial{transferable ? "D" : "B",
                                  {kp.public_key.begin(), kp.public_key.end()}});
}

namespace {

SigningThreshold default_sith(std::size_t count) {
  return SigningThreshold::integer(static_cast<std::uint32_t>(count / 2 + 1));
}

std::vector<std::string> keys_at(const KeyBank& bank, std::uint64_t start, std::size_t count) {
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < count; ++i) keys.push_back(bank.qualified_public(start + i));
  return keys;
}

}  // namespace

std::vector<std::string> Controller::current_keys() const {
  return keys_at(bank_, key_index_, key_count_);
}

std::vector<IndexedSignature> Controller::sign(std::span<const std::uint8_t> bytes) const {
  std::vector<IndexedSignature> sigs;
  for (std::size_t i = 0; i < key_count_; ++i) {
    const auto kp = bank_.key(key_index_ + i);
    const auto sig = crypto::ed25519_sign(kp.secret_key, bytes);
    sigs.push_back(IndexedSignature{"A", static_cast<int>(i), {sig.begin(), sig.end()}});
  }
  return sigs;
}

SignedEvent Controller::finish(KeyEvent event) const {
  SignedEvent out;
  out.bytes = serialize(event, config_.ser_kind);
  out.event = std::move(event);
  out.signatures = sign(out.bytes);
  return out;
}

Controller Controller::incept(KeyBank bank, ControllerConfig config,
                              std::optional<LocationSeal> delegator_location) {
  Controller c;
  c.bank_ = bank;
  c.config_ = config;
  c.key_index_ = 0;
  c.key_count_ = config.key_count;
  c.next_count_ = config.next_count;
  if (c.key_count_ == 0) throw std::invalid_argument("key count must be positive");
  c.sith_ = config.sith.value_or(default_sith(c.key_count_));
  c.next_sith_ = config.next_sith.value_or(
      c.next_count_ ? default_sith(c.next_count_) : SigningThreshold::integer(1));

  InceptionSeed seed;
  seed.sith = c.sith_;
  seed.public_keys = keys_at(bank, 0, c.key_count_);
  if (c.next_count_ > 0) {
    seed.next_digest = encode(next_digest(
        c.next_sith_, keys_at(bank, c.key_count_, c.next_count_), config.digest_code));
  }
  seed.tally = config.toad;
  seed.witnesses = config.witnesses;
  seed.config = config.config_traits;
  seed.delegator_location = delegator_location;

  Prefix prefix;
  switch (config.prefix_class) {
    case PrefixClass::Basic: {
      if (c.key_count_ != 1) throw std::invalid_argument("basic prefixes are single-key");
      prefix = derive_basic(decode(seed.public_keys.front()), c.next_count_ > 0);
      break;
    }
    case PrefixClass::SelfAddressing:
      prefix = derive_self_addressing(seed, config.digest_code);
      break;
    case PrefixClass::SelfSigning: {
      if (c.key_count_ != 1) throw std::invalid_argument("self-signing prefixes are single-key");
      prefix = derive_self_signing(seed, bank.key(0).secret_key);
      break;
    }
  }
  c.prefix_ = prefix.text();

  const KeyEvent event = inception_event(seed, c.prefix_);
  c.inception_ = c.finish(event);
  c.sn_ = 0;
  c.latest_digest_ = encode(digest_event(c.inception_.bytes, config.digest_code));
  return c;
}

SignedEvent Controller::rotate(const RotationSpec& spec) {
  if (abandoned()) throw std::logic_error("identifier abandoned: no further events");

  // The committed next set becomes current.
  const std::uint64_t new_index = key_index_ + key_count_;
  const std::size_t new_count = next_count_;
  const SigningThreshold new_sith = spec.sith.value_or(next_sith_);
  const std::size_t new_next_count = spec.next_count;
  const SigningThreshold new_next_sith = spec.next_sith.value_or(
      new_next_count ? default_sith(new_next_count) : SigningThreshold::integer(1));

  KeyEvent event;
  event.prefix = prefix_;
  event.sn = sn_ + 1;
  event.prior_digest = latest_digest_;
  event.ilk = Ilk::rot;
  event.sith = new_sith;
  event.keys = keys_at(bank_, new_index, new_count);
  if (new_next_count > 0) {
    event.next_digest = encode(next_digest(
        new_next_sith, keys_at(bank_, new_index + new_count, new_next_count),
        config_.digest_code));
  }
  event.toad = spec.toad.value_or(config_.toad);
  event.cuts = spec.cuts;
  event.adds = spec.adds;
  event.seals = spec.seals;

  key_index_ = new_index;
  key_count_ = new_count;
  next_count_ = new_next_count;
  sith_ = new_sith;
  next_sith_ = new_next_sith;
  config_.toad = event.toad;

  SignedEvent out = finish(event);
  sn_ = out.event.sn;
  latest_digest_ = encode(digest_event(out.bytes, config_.digest_code));
  return out;
}

SignedEvent Controller::interact(std::vector<Seal> seals) {
  if (abandoned()) throw std::logic_error("identifier abandoned: no further events");
  KeyEvent event;
  event.prefix = prefix_;
  event.sn = sn_ + 1;
  event.prior_digest = latest_digest_;
  event.ilk = Ilk::ixn;
  event.seals = std::move(seals);

  SignedEvent out = finish(event);
  sn_ = out.event.sn;
  latest_digest_ = encode(digest_event(out.bytes, config_.digest_code));
  return out;
}

void Controller::adopt(const SignedEvent& accepted) {
  sn_ = accepted.event.sn;
  latest_digest_ = encode(digest_event(accepted.bytes, config_.digest_code));
}

Controller Controller::restore(const Snapshot& snapshot) {
  Controller c;
  c.bank_ = KeyBank(snapshot.master);
  c.config_ = snapshot.config;
  c.prefix_ = snapshot.prefix;
  c.sn_ = snapshot.sn;
  c.latest_digest_ = snapshot.latest_digest;
  c.key_index_ = snapshot.key_index;
  c.key_count_ = snapshot.key_count;
  c.next_count_ = snapshot.next_count;
  c.sith_ = snapshot.sith;
  c.next_sith_ = snapshot.next_sith;
  return c;
}

Controller::Snapshot Controller::snapshot() const {
  Snapshot s;
  s.master = bank_.master();
  s.config = config_;
  s.prefix = prefix_;
  s.sn = sn_;
  s.latest_digest = latest_digest_;
  s.key_index = key_index_;
  s.key_count = key_count_;
  s.next_count = next_count_;
  s.sith = sith_;
  s.next_sith = next_sith_;
  return s;
}

// ---------------------------------------------------------------------------
// Cooperative delegation

namespace {

// Header of the pending delegating event, fixed before the delegated event
// is built so the location seal can cross-reference it.
struct PendingDelegating {
  std::uint64_t sn;
  Ilk ilk;
  std::string prior_digest;

  LocationSeal seal(const std::string& delegator_prefix) const {
    return LocationSeal{delegator_prefix, sn, ilk, prior_digest};
  }
};

}  // namespace

DelegationPair delegate_inception(Controller& delegator, KeyBank delegate_bank,
                                  ControllerConfig delegate_config, DelegationKind kind,
                                  std::optional<Controller>& delegate_out) {
  const PendingDelegating pending{
      delegator.sn() + 1,
      kind == DelegationKind::Interaction ? Ilk::ixn : Ilk::rot,
      delegator.latest_digest()};
  const LocationSeal location = pending.seal(delegator.prefix());

  delegate_config.prefix_class = PrefixClass::SelfAddressing;
  Controller delegate = Controller::incept(delegate_bank, delegate_config, location);
  const SignedEvent delegated = delegate.inception();

  const EventSeal anchor{delegate.prefix(), 0,
                         encode(digest_event(delegated.bytes, delegate_config.digest_code))};

  DelegationPair pair;
  if (kind == DelegationKind::Interaction) {
    pair.delegating = delegator.interact({Seal{anchor}});
  } else {
    Controller::RotationSpec spec;
    spec.seals = {Seal{anchor}};
    pair.delegating = delegator.rotate(spec);
  }
  pair.delegated = delegated;
  delegate_out = std::move(delegate);
  return pair;
}

DelegationPair delegate_rotation(Controller& delegator, Controller& delegate,
                                 const Controller::RotationSpec& spec, DelegationKind kind) {
  const PendingDelegating pending{
      delegator.sn() + 1,
      kind == DelegationKind::Interaction ? Ilk::ixn : Ilk::rot,
      delegator.latest_digest()};
  const LocationSeal location = pending.seal(delegator.prefix());

  // Build the delegated rotation with the location seal, as a drt.
  SignedEvent rotation = delegate.rotate(spec);
  KeyEvent drt = rotation.event;
  drt.ilk = Ilk::drt;
  drt.delegator_seal = location;
  SignedEvent delegated;
  delegated.bytes = serialize(drt, SerKind::JSON);
  delegated.event = drt;
  delegated.signatures = delegate.sign(delegated.bytes);
  delegate.adopt(delegated);

  const EventSeal anchor{delegate.prefix(), drt.sn,
                         encode(digest_event(delegated.bytes, "E"))};

  DelegationPair pair;
  if (kind == DelegationKind::Interaction) {
    pair.delegating = delegator.interact({Seal{anchor}});
  } else {
    Controller::RotationSpec dspec;
    dspec.seals = {Seal{anchor}};
    pair.delegating = delegator.rotate(dspec);
  }
  pair.delegated = delegated;
  return pair;
}

}  // namespace keri
