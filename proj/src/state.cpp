// SPDX-License-Identifier: Apache-2.0

#include "keri/state.hpp"

#include <algorithm>

#include "keri/crypto.hpp"

namespace keri {

std::string_view disposition_name(Disposition d) {
  switch (d) {
    case Disposition::AcceptedFirstSeen: return "accepted-first-seen";
    case Disposition::DuplicateIdentical: return "duplicate-identical";
    case Disposition::Duplicitous: return "duplicitous";
    case Disposition::SupersedingRecovery: return "superseding-recovery";
    case Disposition::EscrowedOutOfOrder: return "escrowed-out-of-order";
    case Disposition::EscrowedPartialSig: return "escrowed-partial-sig";
    case Disposition::Rejected: return "rejected";
  }
  return "unknown";
}

OJson KeyState::to_json() const {
  OJson j = OJson::object();
  j["i"] = prefix;
  j["s"] = sn_text(sn);
  j["d"] = digest;
  j["es"] = sn_text(last_est_sn);
  j["ed"] = last_est_digest;
  j["kt"] = sith.to_json();
  j["k"] = keys;
  j["n"] = next_digest;
  j["wt"] = std::to_string(toad);
  j["w"] = witnesses;
  j["c"] = config;
  j["di"] = delegator;
  j["ri"] = sn_text(first_key_index);
  return j;
}

SigCheck verify_signatures(std::span<const std::uint8_t> bytes,
                           const std::vector<IndexedSignature>& sigs,
                           const std::vector<std::string>& keys) {
  SigCheck check;
  for (const auto& sig : sigs) {
    if (sig.index < 0 || static_cast<std::size_t>(sig.index) >= keys.size()) {
      check.any_invalid = true;
      continue;
    }
    bool ok = false;
    try {
      const QualifiedMaterial key = decode(keys[static_cast<std::size_t>(sig.index)]);
      // Ed25519 is the implemented suite; scheme "A" pairs with B/D keys.
      if (sig.scheme == "A" && (key.code == "B" || key.code == "D")) {
        ok = crypto::ed25519_verify(key.raw, sig.raw, bytes);
      }
    } catch (const CodecError&) {
      ok = false;
    }
    if (ok) {
      check.valid.insert(static_cast<std::size_t>(sig.index));
    } else {
      check.any_invalid = true;
    }
  }
  return check;
}

namespace {

bool threshold_met(const SigningThreshold& sith, const SigCheck& check, std::size_t key_count) {
  try {
    return sith.satisfies(check.valid, key_count);
  } catch (const ThresholdError&) {
    return false;
  }
}

std::vector<std::string> witness_algebra(const std::vector<std::string>& old_set,
                                         const std::vector<std::string>& cuts,
                                         const std::vector<std::string>& adds) {
  std::vector<std::string> out;
  for (const auto& w : old_set) {
    if (std::find(cuts.begin(), cuts.end(), w) == cuts.end()) out.push_back(w);
  }
  out.insert(out.end(), adds.begin(), adds.end());
  return out;
}

InceptionSeed seed_of(const KeyEvent& event) {
  InceptionSeed seed;
  seed.sith = event.sith;
  seed.public_keys = event.keys;
  seed.next_digest = event.next_digest;
  seed.tally = event.toad;
  seed.witnesses = event.wits;
  seed.config = event.cnfg;
  seed.delegator_location = event.delegator_seal;
  return seed;
}

bool est_only(const std::vector<std::string>& config) {
  return std::find(config.begin(), config.end(), "EstOnly") != config.end();
}

}  // namespace

Check verify_rotation(const KeyState& state, const KeyEvent& event) {
  if (event.ilk != Ilk::rot && event.ilk != Ilk::drt) {
    return Check::fail("not-a-rotation");
  }
  if (state.next_digest.empty()) return Check::fail("abandoned-identifier");
  if (event.prior_digest != state.digest) return Check::fail("prior-digest-mismatch");

  // Unhiding: the disclosed (sith, keys) must reproduce the stored
  // commitment under the commitment's own digest code.
  std::string commit_code;
  try {
    commit_code = decode(state.next_digest).code;
  } catch (const CodecError&) {
    return Check::fail("pre-rotation-mismatch");
  }
  if (encode(next_digest(event.sith, event.keys, commit_code)) != state.next_digest) {
    return Check::fail("pre-rotation-mismatch");
  }

  // Witness-set algebra: cuts from the old set, adds disjoint from it.
  for (const auto& cut : event.cuts) {
    if (std::find(state.witnesses.begin(), state.witnesses.end(), cut) ==
        state.witnesses.end()) {
      return Check::fail("cut-not-a-witness");
    }
  }
  for (const auto& add : event.adds) {
    if (std::find(state.witnesses.begin(), state.witnesses.end(), add) !=
        state.witnesses.end()) {
      return Check::fail("add-already-a-witness");
    }
    if (std::count(event.adds.begin(), event.adds.end(), add) != 1) {
      return Check::fail("duplicate-witness-add");
    }
    try {
      if (!is_nontransferable_code(decode(add).code)) {
        return Check::fail("witness-not-nontransferable");
      }
    } catch (const CodecError&) {
      return Check::fail("witness-not-nontransferable");
    }
  }
  const auto new_set = witness_algebra(state.witnesses, event.cuts, event.adds);
  if (event.toad > new_set.size()) return Check::fail("tally-exceeds-witnesses");
  return {};
}

Check verify_delegation(const KeyEvent& delegated_event, const std::string& delegated_digest,
                        const DelegatorView& delegator_log,
                        std::optional<std::uint64_t> superseded_epoch) {
  if (!delegated_event.delegator_seal) return Check::fail("delegator-seal-missing");
  const LocationSeal& loc = *delegated_event.delegator_seal;
  const EventRecord* anchor = delegator_log.find_at_location(loc.sn, loc.ilk, loc.prior_digest);
  if (!anchor) return Check::fail("delegating-event-not-found");

  bool sealed = false;
  for (const Seal& seal : anchor->event.seals) {
    const auto* ev = std::get_if<EventSeal>(&seal);
    if (ev && ev->prefix == delegated_event.prefix && ev->sn == delegated_event.sn &&
        ev->digest == delegated_digest) {
      sealed = true;
      break;
    }
  }
  if (!sealed) return Check::fail("seal-mismatch");

  if (superseded_epoch) {
    // Nested recovery: the delegator's keys must have rotated since the keys
    // that delegated the superseded event.
    const auto epoch = delegator_log.authority_epoch(loc.sn);
    if (!epoch || *epoch <= *superseded_epoch) {
      return Check::fail("stale-delegator-authority");
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Processor

struct Processor::PrefixEntry {
  std::optional<KeyState> state;
  std::vector<EventRecord> trunk;     // indexed by sequence number
  std::vector<EventRecord> disputed;  // forked-off branch after recovery
  struct View;
};

namespace {

struct TrunkViewImpl final : DelegatorView {
  const std::vector<EventRecord>* trunk = nullptr;

  const EventRecord* find_at_location(std::uint64_t sn, Ilk ilk,
                                      const std::string& prior_digest) const override {
    if (!trunk || sn >= trunk->size()) return nullptr;
    const EventRecord& rec = (*trunk)[static_cast<std::size_t>(sn)];
    if (rec.event.ilk != ilk || rec.event.prior_digest != prior_digest) return nullptr;
    return &rec;
  }

  std::optional<std::uint64_t> authority_epoch(std::uint64_t sn) const override {
    if (!trunk || sn >= trunk->size()) return std::nullopt;
    for (std::uint64_t i = sn + 1; i-- > 0;) {
      if (is_establishment((*trunk)[static_cast<std::size_t>(i)].event.ilk)) return i;
    }
    return std::nullopt;
  }
};

}  // namespace

struct Processor::LogView {
  mutable std::map<const PrefixEntry*, TrunkViewImpl> views;
};

Processor::Processor(ProcessorOptions options) : options_(std::move(options)) {}
Processor::~Processor() = default;
Processor::Processor(Processor&&) noexcept = default;
Processor& Processor::operator=(Processor&&) noexcept = default;

void Processor::set_delegator_resolver(DelegatorResolver resolver) {
  resolver_ = std::move(resolver);
}

const KeyState* Processor::state(const std::string& prefix) const {
  auto it = entries_.find(prefix);
  if (it == entries_.end() || !it->second->state) return nullptr;
  return &*it->second->state;
}

const std::vector<EventRecord>& Processor::trunk(const std::string& prefix) const {
  static const std::vector<EventRecord> empty;
  auto it = entries_.find(prefix);
  return it == entries_.end() ? empty : it->second->trunk;
}

const std::vector<EventRecord>& Processor::disputed(const std::string& prefix) const {
  static const std::vector<EventRecord> empty;
  auto it = entries_.find(prefix);
  return it == entries_.end() ? empty : it->second->disputed;
}

std::vector<std::string> Processor::prefixes() const {
  std::vector<std::string> out;
  for (const auto& [prefix, entry] : entries_) {
    if (entry->state) out.push_back(prefix);
  }
  return out;
}

const DelegatorView* Processor::view(const std::string& prefix) const {
  auto it = entries_.find(prefix);
  if (it == entries_.end()) return nullptr;
  if (!views_) views_ = std::make_unique<LogView>();
  TrunkViewImpl& v = views_->views[it->second.get()];
  v.trunk = &it->second->trunk;
  return &v;
}

std::size_t Processor::escrowed_out_of_order() const { return out_of_order_.size(); }
std::size_t Processor::escrowed_partial_sig() const { return partial_sig_.size(); }

ApplyOutcome Processor::apply(std::span<const std::uint8_t> event_bytes,
                              std::vector<IndexedSignature> sigs) {
  std::vector<std::uint8_t> bytes(event_bytes.begin(), event_bytes.end());
  KeyEvent event;
  try {
    event = deserialize(bytes);
  } catch (const EventError& e) {
    ApplyOutcome outcome;
    outcome.disposition = Disposition::Rejected;
    outcome.reason = std::string("malformed: ") + e.what();
    return outcome;
  }
  return apply_parsed(std::move(bytes), std::move(event), std::move(sigs), false);
}

Check Processor::verify_inception(const KeyEvent& event) const {
  Prefix prefix;
  try {
    prefix = Prefix::from_text(event.prefix);
  } catch (const std::exception&) {
    return Check::fail("bad-prefix");
  }
  if (event.keys.empty()) return Check::fail("no-keys");
  // A delegated prefix must bind its delegator, which only the
  // self-addressing derivation does.
  if (event.ilk == Ilk::dip && prefix.prefix_class() != PrefixClass::SelfAddressing) {
    return Check::fail("delegated-prefix-not-self-addressing");
  }
  if (!verify_prefix(prefix, seed_of(event))) return Check::fail("prefix-binding");
  if (!prefix.transferable() && !event.next_digest.empty()) {
    return Check::fail("nontransferable-next-digest");
  }
  std::set<std::string> unique(event.wits.begin(), event.wits.end());
  if (unique.size() != event.wits.size()) return Check::fail("duplicate-witness");
  for (const auto& w : event.wits) {
    try {
      if (!is_nontransferable_code(decode(w).code)) {
        return Check::fail("witness-not-nontransferable");
      }
    } catch (const CodecError&) {
      return Check::fail("witness-not-nontransferable");
    }
  }
  if (event.toad > event.wits.size()) return Check::fail("tally-exceeds-witnesses");
  return {};
}

const KeyState* Processor::governing_state(const PrefixEntry& entry, std::uint64_t sn) const {
  if (sn == 0 || entry.trunk.size() < sn) return nullptr;
  return &entry.trunk[static_cast<std::size_t>(sn - 1)].state_after;
}

ApplyOutcome Processor::apply_parsed(std::vector<std::uint8_t> bytes, KeyEvent event,
                                     std::vector<IndexedSignature> sigs, bool from_escrow) {
  ApplyOutcome outcome;
  outcome.prefix = event.prefix;
  outcome.sn = event.sn;
  outcome.digest = encode(digest_event(bytes, options_.digest_code));

  if (event.ilk == Ilk::rcpt || event.ilk == Ilk::vrct) {
    outcome.reason = "not-a-key-event";
    return outcome;
  }

  // Merge any signatures already escrowed for this exact event version.
  if (!from_escrow) {
    for (auto it = partial_sig_.begin(); it != partial_sig_.end(); ++it) {
      if (it->first == outcome.digest) {
        for (const auto& sig : it->second.sigs) {
          const bool present = std::any_of(sigs.begin(), sigs.end(), [&](const auto& s) {
            return s.index == sig.index && s.scheme == sig.scheme;
          });
          if (!present) sigs.push_back(sig);
        }
        partial_sig_.erase(it);
        break;
      }
    }
  }

  auto entry_it = entries_.find(event.prefix);
  PrefixEntry* entry = entry_it == entries_.end() ? nullptr : entry_it->second.get();
  const bool has_state = entry && entry->state.has_value();

  if (!has_state) {
    if ((event.ilk == Ilk::icp || event.ilk == Ilk::dip) && event.sn == 0) {
      const Check inception = verify_inception(event);
      if (!inception.ok) {
        outcome.reason = inception.reason;
        return outcome;
      }
      if (event.ilk == Ilk::dip) {
        const DelegatorView* delegator = resolver_ ? resolver_(event.delegator_seal->prefix)
                                                   : view(event.delegator_seal->prefix);
        const Check delegation = delegator
                                     ? verify_delegation(event, outcome.digest, *delegator)
                                     : Check::fail("delegating-event-not-found");
        if (!delegation.ok) {
          // The anchor may simply not have arrived yet.
          if (delegation.reason == "delegating-event-not-found" && !from_escrow) {
            const std::string delegator_prefix = event.delegator_seal->prefix;
            return escrow_delegation(std::move(bytes), std::move(event), std::move(sigs),
                                     std::move(outcome), delegator_prefix);
          }
          outcome.reason = delegation.reason;
          return outcome;
        }
      }
      const SigCheck check = verify_signatures(bytes, sigs, event.keys);
      if (check.any_invalid) {
        outcome.reason = "bad-signature";
        return outcome;
      }
      if (!threshold_met(event.sith, check, event.keys.size())) {
        if (!check.valid.empty() && !from_escrow) {
          return escrow_partial(std::move(bytes), std::move(event), std::move(sigs),
                                std::move(outcome));
        }
        outcome.reason = "threshold-unmet";
        return outcome;
      }
      if (!entry) {
        entry =
            entries_.emplace(event.prefix, std::make_unique<PrefixEntry>()).first->second.get();
      }
      return accept(*entry, std::move(bytes), std::move(event), std::move(sigs),
                    Disposition::AcceptedFirstSeen);
    }
    // No state yet: hold what cannot be disproven, provided everything
    // checkable does verify.
    if (is_establishment(event.ilk)) {
      const SigCheck check = verify_signatures(bytes, sigs, event.keys);
      if (check.any_invalid) {
        outcome.reason = "bad-signature";
        return outcome;
      }
      if (check.valid.empty()) {
        outcome.reason = "threshold-unmet";
        return outcome;
      }
    }
    if (from_escrow) {
      outcome.reason = "out-of-order";
      return outcome;
    }
    return escrow_out_of_order(std::move(bytes), std::move(event), std::move(sigs),
                               std::move(outcome));
  }

  KeyState& state = *entry->state;

  if (event.sn <= state.sn) {
    return handle_existing_location(*entry, std::move(bytes), std::move(event), std::move(sigs));
  }

  if (state.next_digest.empty()) {
    outcome.reason = "abandoned-identifier";
    return outcome;
  }
  if (event.ilk == Ilk::ixn && est_only(state.config)) {
    outcome.reason = "est-only-violation";
    return outcome;
  }
  if (event.ilk == Ilk::icp || event.ilk == Ilk::dip) {
    outcome.reason = "inception-not-first";
    return outcome;
  }

  // Nothing chains off the disputed branch once a recovery is accepted.
  for (const EventRecord& rec : entry->disputed) {
    if (rec.digest == event.prior_digest) {
      outcome.reason = "disputed-branch";
      return outcome;
    }
  }

  if (event.sn > state.sn + 1) {
    if (is_establishment(event.ilk)) {
      const SigCheck check = verify_signatures(bytes, sigs, event.keys);
      if (check.any_invalid) {
        outcome.reason = "bad-signature";
        return outcome;
      }
    }
    if (from_escrow) {
      outcome.reason = "out-of-order";
      return outcome;
    }
    return escrow_out_of_order(std::move(bytes), std::move(event), std::move(sigs),
                               std::move(outcome));
  }

  // In-order: event.sn == state.sn + 1.
  if (event.ilk == Ilk::ixn) {
    if (event.prior_digest != state.digest) {
      outcome.reason = "prior-digest-mismatch";
      return outcome;
    }
    const SigCheck check = verify_signatures(bytes, sigs, state.keys);
    if (check.any_invalid) {
      outcome.reason = "bad-signature";
      return outcome;
    }
    if (!threshold_met(state.sith, check, state.keys.size())) {
      if (!check.valid.empty() && !from_escrow) {
        return escrow_partial(std::move(bytes), std::move(event), std::move(sigs),
                              std::move(outcome));
      }
      outcome.reason = "threshold-unmet";
      return outcome;
    }
    return accept(*entry, std::move(bytes), std::move(event), std::move(sigs),
                  Disposition::AcceptedFirstSeen);
  }

  // Rotation (rot or drt).
  if (event.ilk == Ilk::drt && state.delegator.empty()) {
    outcome.reason = "not-a-delegated-identifier";
    return outcome;
  }
  if (event.ilk == Ilk::rot && !state.delegator.empty()) {
    outcome.reason = "delegated-identifier-requires-drt";
    return outcome;
  }
  const Check rotation = verify_rotation(state, event);
  if (!rotation.ok) {
    outcome.reason = rotation.reason;
    return outcome;
  }
  if (event.ilk == Ilk::drt) {
    if (event.delegator_seal->prefix != state.delegator) {
      outcome.reason = "delegator-mismatch";
      return outcome;
    }
    const DelegatorView* delegator =
        resolver_ ? resolver_(state.delegator) : view(state.delegator);
    const Check delegation = delegator ? verify_delegation(event, outcome.digest, *delegator)
                                       : Check::fail("delegating-event-not-found");
    if (!delegation.ok) {
      if (delegation.reason == "delegating-event-not-found" && !from_escrow) {
        const std::string delegator_prefix = state.delegator;
        return escrow_delegation(std::move(bytes), std::move(event), std::move(sigs),
                                 std::move(outcome), delegator_prefix);
      }
      outcome.reason = delegation.reason;
      return outcome;
    }
  }
  const SigCheck check = verify_signatures(bytes, sigs, event.keys);
  if (check.any_invalid) {
    outcome.reason = "bad-signature";
    return outcome;
  }
  if (!threshold_met(event.sith, check, event.keys.size())) {
    if (!check.valid.empty() && !from_escrow) {
      return escrow_partial(std::move(bytes), std::move(event), std::move(sigs),
                            std::move(outcome));
    }
    outcome.reason = "threshold-unmet";
    return outcome;
  }
  return accept(*entry, std::move(bytes), std::move(event), std::move(sigs),
                Disposition::AcceptedFirstSeen);
}

ApplyOutcome Processor::accept(PrefixEntry& entry, std::vector<std::uint8_t> bytes,
                               KeyEvent event, std::vector<IndexedSignature> sigs,
                               Disposition disposition) {
  ApplyOutcome outcome;
  outcome.prefix = event.prefix;
  outcome.sn = event.sn;
  outcome.digest = encode(digest_event(bytes, options_.digest_code));
  outcome.disposition = disposition;

  KeyState next;
  if (!entry.state) {
    next.prefix = event.prefix;
    next.sn = 0;
    next.digest = outcome.digest;
    next.last_est_sn = 0;
    next.last_est_digest = outcome.digest;
    next.sith = event.sith;
    next.keys = event.keys;
    next.next_digest = event.next_digest;
    next.toad = event.toad;
    next.witnesses = event.wits;
    next.config = event.cnfg;
    next.first_key_index = 0;
    if (event.ilk == Ilk::dip) next.delegator = event.delegator_seal->prefix;
  } else {
    next = *entry.state;
    if (disposition == Disposition::SupersedingRecovery) {
      // Rebuild from the state preceding the superseded location.
      next = entry.trunk[static_cast<std::size_t>(event.sn - 1)].state_after;
    }
    next.sn = event.sn;
    next.digest = outcome.digest;
    if (is_establishment(event.ilk)) {
      next.last_est_sn = event.sn;
      next.last_est_digest = outcome.digest;
      next.first_key_index += next.keys.size();  // next start index = r + L
      next.sith = event.sith;
      next.keys = event.keys;
      next.next_digest = event.next_digest;
      next.toad = event.toad;
      next.witnesses = witness_algebra(next.witnesses, event.cuts, event.adds);
    }
  }

  if (disposition == Disposition::SupersedingRecovery) {
    const std::size_t fork = static_cast<std::size_t>(event.sn);
    outcome.toad_at_recovery = entry.trunk[fork - 1].state_after.toad;
    for (std::size_t i = fork; i < entry.trunk.size(); ++i) {
      outcome.disputed_sns.push_back(entry.trunk[i].event.sn);
      entry.disputed.push_back(std::move(entry.trunk[i]));
    }
    entry.trunk.resize(fork);
  }

  EventRecord record;
  record.bytes = std::move(bytes);
  record.event = std::move(event);
  record.digest = outcome.digest;
  record.sigs = std::move(sigs);
  record.state_after = next;
  entry.trunk.push_back(std::move(record));
  entry.state = std::move(next);

  outcome.flushed = flush_escrows(outcome.prefix);
  return outcome;
}

ApplyOutcome Processor::handle_existing_location(PrefixEntry& entry,
                                                 std::vector<std::uint8_t> bytes, KeyEvent event,
                                                 std::vector<IndexedSignature> sigs) {
  ApplyOutcome outcome;
  outcome.prefix = event.prefix;
  outcome.sn = event.sn;
  outcome.digest = encode(digest_event(bytes, options_.digest_code));

  EventRecord& stored = entry.trunk[static_cast<std::size_t>(event.sn)];

  if (stored.bytes == bytes) {
    // Byte-identical redelivery: idempotent, but new valid signatures
    // accumulate on the stored record.
    const KeyState* governing = governing_state(entry, stored.event.sn);
    const std::vector<std::string>& signing_keys =
        is_establishment(stored.event.ilk) ? stored.event.keys : governing->keys;
    const SigCheck check = verify_signatures(bytes, sigs, signing_keys);
    for (const auto& sig : sigs) {
      if (sig.index < 0 || !check.valid.contains(static_cast<std::size_t>(sig.index))) continue;
      const bool present =
          std::any_of(stored.sigs.begin(), stored.sigs.end(), [&](const auto& s) {
            return s.index == sig.index && s.scheme == sig.scheme;
          });
      if (!present) stored.sigs.push_back(sig);
    }
    outcome.disposition = Disposition::DuplicateIdentical;
    return outcome;
  }
  for (const EventRecord& rec : entry.disputed) {
    if (rec.bytes == bytes) {
      outcome.disposition = Disposition::DuplicateIdentical;
      outcome.reason = "disputed-branch";
      return outcome;
    }
  }

  // Different bytes. Same location requires the same prior digest (inception
  // events have none and so always share their location).
  if (event.prior_digest != stored.event.prior_digest) {
    outcome.reason = "prior-digest-mismatch";
    return outcome;
  }

  const KeyState* governing = governing_state(entry, event.sn);
  const bool stored_est = is_establishment(stored.event.ilk);
  const bool new_est = is_establishment(event.ilk);

  // Superseding recovery: a rotation overrides an interaction at the same
  // location. In a delegated log a delegated rotation may also override an
  // establishment event, gated by the delegator's rotation epoch.
  if ((event.ilk == Ilk::rot || event.ilk == Ilk::drt) && governing) {
    const bool delegated = !governing->delegator.empty();
    const bool may_supersede = !stored_est || (delegated && event.ilk == Ilk::drt);
    if (may_supersede) {
      if (delegated && event.ilk == Ilk::rot) {
        outcome.reason = "delegated-identifier-requires-drt";
        return outcome;
      }
      if (!delegated) {
        for (std::size_t i = static_cast<std::size_t>(event.sn); i < entry.trunk.size(); ++i) {
          if (is_establishment(entry.trunk[i].event.ilk)) {
            outcome.reason = "supersede-blocked-by-establishment";
            return outcome;
          }
        }
      }
      const Check rotation = verify_rotation(*governing, event);
      if (!rotation.ok) {
        outcome.reason = rotation.reason;
        return outcome;
      }
      if (event.ilk == Ilk::drt) {
        const DelegatorView* delegator =
            resolver_ ? resolver_(governing->delegator) : view(governing->delegator);
        if (!delegator) {
          outcome.reason = "delegating-event-not-found";
          return outcome;
        }
        std::optional<std::uint64_t> superseded_epoch;
        if (stored_est && stored.event.delegator_seal) {
          superseded_epoch = delegator->authority_epoch(stored.event.delegator_seal->sn);
        }
        const Check delegation =
            verify_delegation(event, outcome.digest, *delegator, superseded_epoch);
        if (!delegation.ok) {
          outcome.reason = delegation.reason;
          return outcome;
        }
      }
      const SigCheck check = verify_signatures(bytes, sigs, event.keys);
      if (check.any_invalid) {
        outcome.reason = "bad-signature";
        return outcome;
      }
      if (!threshold_met(event.sith, check, event.keys.size())) {
        outcome.reason = "threshold-unmet";
        return outcome;
      }
      return accept(entry, std::move(bytes), std::move(event), std::move(sigs),
                    Disposition::SupersedingRecovery);
    }
  }

  // Conflicting version at an established location. It proves duplicity only
  // when it verifies on its own; otherwise it is a mere forgery.
  bool verifies = false;
  if (event.sn == 0 && (event.ilk == Ilk::icp || event.ilk == Ilk::dip)) {
    const SigCheck check = verify_signatures(bytes, sigs, event.keys);
    verifies = verify_inception(event).ok && !check.any_invalid &&
               threshold_met(event.sith, check, event.keys.size());
  } else if (new_est && governing) {
    const SigCheck check = verify_signatures(bytes, sigs, event.keys);
    verifies = verify_rotation(*governing, event).ok && !check.any_invalid &&
               threshold_met(event.sith, check, event.keys.size());
  } else if (!new_est && governing) {
    const SigCheck check = verify_signatures(bytes, sigs, governing->keys);
    verifies = !check.any_invalid && threshold_met(governing->sith, check, governing->keys.size());
  }

  if (!verifies) {
    outcome.reason = "bad-signature";
    return outcome;
  }
  duplicity_.push_back(DuplicityEntry{event.prefix, event.sn, stored.bytes, std::move(bytes),
                                      std::move(sigs)});
  outcome.disposition = Disposition::Duplicitous;
  return outcome;
}

ApplyOutcome Processor::escrow_out_of_order(std::vector<std::uint8_t> bytes, KeyEvent event,
                                            std::vector<IndexedSignature> sigs,
                                            ApplyOutcome outcome) {
  while (out_of_order_.size() >= options_.out_of_order_limit) out_of_order_.pop_front();
  EscrowKey key{event.prefix, event.sn};
  out_of_order_.emplace_back(std::move(key),
                             EscrowedEvent{std::move(bytes), std::move(event), std::move(sigs)});
  outcome.disposition = Disposition::EscrowedOutOfOrder;
  return outcome;
}

ApplyOutcome Processor::escrow_partial(std::vector<std::uint8_t> bytes, KeyEvent event,
                                       std::vector<IndexedSignature> sigs, ApplyOutcome outcome) {
  while (partial_sig_.size() >= options_.partial_sig_limit) partial_sig_.pop_front();
  partial_sig_.emplace_back(outcome.digest,
                            EscrowedEvent{std::move(bytes), std::move(event), std::move(sigs)});
  outcome.disposition = Disposition::EscrowedPartialSig;
  return outcome;
}

ApplyOutcome Processor::escrow_delegation(std::vector<std::uint8_t> bytes, KeyEvent event,
                                          std::vector<IndexedSignature> sigs,
                                          ApplyOutcome outcome, const std::string& delegator) {
  while (delegation_.size() >= options_.out_of_order_limit) delegation_.pop_front();
  delegation_.emplace_back(delegator,
                           EscrowedEvent{std::move(bytes), std::move(event), std::move(sigs)});
  outcome.disposition = Disposition::EscrowedOutOfOrder;
  outcome.reason = "awaiting-delegating-event";
  return outcome;
}

std::size_t Processor::flush_escrows(const std::string& prefix) {
  std::size_t flushed = 0;

  // Delegated events waiting on this prefix's log: retry each entry once.
  if (!delegation_.empty()) {
    std::deque<std::pair<std::string, EscrowedEvent>> keep;
    while (!delegation_.empty()) {
      auto [delegator, held] = std::move(delegation_.front());
      delegation_.pop_front();
      if (delegator != prefix) {
        keep.emplace_back(std::move(delegator), std::move(held));
        continue;
      }
      EscrowedEvent copy = held;
      const ApplyOutcome sub =
          apply_parsed(std::move(held.bytes), std::move(held.event), std::move(held.sigs), true);
      if (sub.disposition == Disposition::AcceptedFirstSeen ||
          sub.disposition == Disposition::SupersedingRecovery) {
        flushed += 1 + sub.flushed;
      } else if (sub.reason == "delegating-event-not-found") {
        // The anchor may still be on its way; hold on.
        keep.emplace_back(std::move(delegator), std::move(copy));
      }
    }
    delegation_ = std::move(keep);
  }

  bool progressed = true;
  while (progressed) {
    progressed = false;
    const KeyState* current = state(prefix);
    if (!current) break;
    const std::uint64_t want = current->sn + 1;

    for (auto it = out_of_order_.begin(); it != out_of_order_.end(); ++it) {
      if (it->first.prefix != prefix || it->first.sn != want) continue;
      EscrowedEvent held = std::move(it->second);
      out_of_order_.erase(it);
      const ApplyOutcome sub =
          apply_parsed(std::move(held.bytes), std::move(held.event), std::move(held.sigs), true);
      if (sub.disposition == Disposition::AcceptedFirstSeen ||
          sub.disposition == Disposition::SupersedingRecovery) {
        flushed += 1 + sub.flushed;
        progressed = true;
      }
      break;
    }
    if (progressed) continue;

    for (auto it = partial_sig_.begin(); it != partial_sig_.end(); ++it) {
      if (it->second.event.prefix != prefix || it->second.event.sn != want) continue;
      EscrowedEvent held = std::move(it->second);
      partial_sig_.erase(it);
      const ApplyOutcome sub =
          apply_parsed(std::move(held.bytes), std::move(held.event), std::move(held.sigs), true);
      if (sub.disposition == Disposition::AcceptedFirstSeen ||
          sub.disposition == Disposition::SupersedingRecovery) {
        flushed += 1 + sub.flushed;
        progressed = true;
      }
      break;
    }
  }
  return flushed;
}

}  // namespace keri
