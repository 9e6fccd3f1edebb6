// SPDX-License-Identifier: Apache-2.0
//
// The key-state verifier core: applies a stream of key events to per-prefix
// state, enforcing signatures, thresholds, pre-rotation commitments, the
// first-seen policy, superseding recovery, delegation cross-anchoring, and
// escrow of out-of-order or partially signed events.

#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "keri/event.hpp"
#include "keri/identifier.hpp"

namespace keri {

enum class Disposition {
  AcceptedFirstSeen,
  DuplicateIdentical,
  Duplicitous,
  SupersedingRecovery,
  EscrowedOutOfOrder,
  EscrowedPartialSig,
  Rejected,
};

std::string_view disposition_name(Disposition d);

/// The verified current control authority for one prefix.
struct KeyState {
  std::string prefix;
  std::uint64_t sn = 0;
  std::string digest;  // of the latest accepted event bytes
  std::uint64_t last_est_sn = 0;
  std::string last_est_digest;
  SigningThreshold sith;
  std::vector<std::string> keys;
  std::string next_digest;  // empty: identifier abandoned, no further events
  std::uint32_t toad = 0;
  std::vector<std::string> witnesses;
  std::vector<std::string> config;
  std::string delegator;            // delegator prefix, empty when none
  std::uint64_t first_key_index = 0;  // index of keys[0] in the key sequence

  OJson to_json() const;
  bool operator==(const KeyState&) const = default;
};

struct EventRecord {
  std::vector<std::uint8_t> bytes;
  KeyEvent event;
  std::string digest;  // qualified digest of bytes
  std::vector<IndexedSignature> sigs;
  KeyState state_after;  // state snapshot once this event applied
};

struct ApplyOutcome {
  Disposition disposition = Disposition::Rejected;
  std::string reason;  // stable token, e.g. "bad-signature", empty on accept
  std::string prefix;
  std::uint64_t sn = 0;
  std::string digest;
  std::vector<std::uint64_t> disputed_sns;  // filled on superseding recovery
  std::uint32_t toad_at_recovery = 0;       // tally in force over the disputed tail
  std::size_t flushed = 0;                  // escrowed events drained by this accept
};

struct SigCheck {
  std::set<std::size_t> valid;
  bool any_invalid = false;
};

/// Verifies each indexed signature over `bytes` against the addressed key.
/// Out-of-range indices and non-Ed25519 key codes count as invalid.
SigCheck verify_signatures(std::span<const std::uint8_t> bytes,
                           const std::vector<IndexedSignature>& sigs,
                           const std::vector<std::string>& keys);

struct Check {
  bool ok = true;
  std::string reason;
  static Check fail(std::string r) { return {false, std::move(r)}; }
};

/// Rotation checks against the state the rotation would consume: the prior
/// digest, the pre-rotation unhiding, and the witness-set algebra. Signature
/// checks are separate (they need the event bytes).
Check verify_rotation(const KeyState& state, const KeyEvent& event);

/// How the engine sees a delegator's log when validating dip/drt events.
class DelegatorView {
 public:
  virtual ~DelegatorView() = default;
  /// Trunk record at the exact location, or nullptr.
  virtual const EventRecord* find_at_location(std::uint64_t sn, Ilk ilk,
                                              const std::string& prior_digest) const = 0;
  /// sn of the establishment event governing the keys that signed the event
  /// at `sn` (the latest establishment event at or before it).
  virtual std::optional<std::uint64_t> authority_epoch(std::uint64_t sn) const = 0;
};

/// Confirms the cross-anchor: the delegating event exists at the sealed
/// location and carries an event seal whose digest matches the delegated
/// event. `superseded_epoch`, when set, enforces the nested-recovery rule:
/// the new delegating event must be governed by delegator keys rotated
/// later than those that delegated the superseded event.
Check verify_delegation(const KeyEvent& delegated_event, const std::string& delegated_digest,
                        const DelegatorView& delegator_log,
                        std::optional<std::uint64_t> superseded_epoch = std::nullopt);

struct ProcessorOptions {
  std::string digest_code = "E";
  std::size_t out_of_order_limit = 1024;
  std::size_t partial_sig_limit = 1024;
};

/// Multi-prefix verifier engine. Single writer; concurrent readers may use
/// snapshots returned by state()/trunk() only between apply() calls.
class Processor {
 public:
  explicit Processor(ProcessorOptions options = {});
  ~Processor();
  Processor(Processor&&) noexcept;
  Processor& operator=(Processor&&) noexcept;

  /// Verifies one serialized key event with its attached signatures and
  /// advances the per-prefix state. Never throws on bad input events;
  /// failures come back in the outcome.
  ApplyOutcome apply(std::span<const std::uint8_t> event_bytes,
                     std::vector<IndexedSignature> sigs);

  /// Resolves a delegator prefix to a log view; defaults to this processor's
  /// own logs, which suffices when delegator and delegate share a store.
  using DelegatorResolver = std::function<const DelegatorView*(const std::string&)>;
  void set_delegator_resolver(DelegatorResolver resolver);

  const KeyState* state(const std::string& prefix) const;
  const std::vector<EventRecord>& trunk(const std::string& prefix) const;
  const std::vector<EventRecord>& disputed(const std::string& prefix) const;
  std::vector<std::string> prefixes() const;

  /// A provable inconsistency: two verifiable versions at one location.
  struct DuplicityEntry {
    std::string prefix;
    std::uint64_t sn = 0;
    std::vector<std::uint8_t> original_bytes;
    std::vector<std::uint8_t> conflicting_bytes;
    std::vector<IndexedSignature> conflicting_sigs;
  };
  const std::vector<DuplicityEntry>& duplicity() const { return duplicity_; }

  const DelegatorView* view(const std::string& prefix) const;

  std::size_t escrowed_out_of_order() const;
  std::size_t escrowed_partial_sig() const;

 private:
  struct PrefixEntry;
  struct LogView;

  ApplyOutcome apply_parsed(std::vector<std::uint8_t> bytes, KeyEvent event,
                            std::vector<IndexedSignature> sigs, bool from_escrow);
  ApplyOutcome accept(PrefixEntry& entry, std::vector<std::uint8_t> bytes, KeyEvent event,
                      std::vector<IndexedSignature> sigs, Disposition disposition);
  ApplyOutcome handle_existing_location(PrefixEntry& entry, std::vector<std::uint8_t> bytes,
                                        KeyEvent event, std::vector<IndexedSignature> sigs);
  ApplyOutcome escrow_out_of_order(std::vector<std::uint8_t> bytes, KeyEvent event,
                                   std::vector<IndexedSignature> sigs, ApplyOutcome outcome);
  ApplyOutcome escrow_partial(std::vector<std::uint8_t> bytes, KeyEvent event,
                              std::vector<IndexedSignature> sigs, ApplyOutcome outcome);
  ApplyOutcome escrow_delegation(std::vector<std::uint8_t> bytes, KeyEvent event,
                                 std::vector<IndexedSignature> sigs, ApplyOutcome outcome,
                                 const std::string& delegator);
  std::size_t flush_escrows(const std::string& prefix);
  Check verify_inception(const KeyEvent& event) const;
  const KeyState* governing_state(const PrefixEntry& entry, std::uint64_t sn) const;

  ProcessorOptions options_;
  std::map<std::string, std::unique_ptr<PrefixEntry>> entries_;
  std::vector<DuplicityEntry> duplicity_;
  DelegatorResolver resolver_;
  mutable std::unique_ptr<LogView> views_;

  struct EscrowKey {
    std::string prefix;
    std::uint64_t sn;
    auto operator<=>(const EscrowKey&) const = default;
  };
  struct EscrowedEvent {
    std::vector<std::uint8_t> bytes;
    KeyEvent event;
    std::vector<IndexedSignature> sigs;
  };
  std::deque<std::pair<EscrowKey, EscrowedEvent>> out_of_order_;
  std::deque<std::pair<std::string, EscrowedEvent>> partial_sig_;  // keyed by digest
  std::deque<std::pair<std::string, EscrowedEvent>> delegation_;   // keyed by delegator
};

}  // namespace keri
