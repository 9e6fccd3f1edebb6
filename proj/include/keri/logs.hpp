// SPDX-License-Identifier: Apache-2.0
//
// Append-only persistence over the verifier core: the KERL (events plus
// accumulated witness receipts and validator receipts), the DEL (proofs of
// duplicity), replay verification, framed export/import, and a plain-file
// directory layout keyed by (prefix, fixed-width-hex sn, digest).

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "keri/controller.hpp"
#include "keri/state.hpp"

namespace keri {

class LogError : public std::runtime_error {
 public:
  enum class Kind { CorruptLog, StorageFailure, UnknownEvent };
  LogError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Proofs of inconsistency: conflicting event versions per location, and
/// witness receipts that attest versions other than the stored one.
class DELStore {
 public:
  struct EventEntry {
    std::string prefix;
    std::uint64_t sn = 0;
    std::vector<std::uint8_t> original_bytes;
    std::vector<std::uint8_t> conflicting_bytes;
    std::vector<IndexedSignature> conflicting_sigs;
    std::string first_seen;
  };
  struct ReceiptEntry {
    std::string witness;
    std::string prefix;
    std::uint64_t sn = 0;
    std::string stored_digest;
    std::string receipted_digest;
    std::string signature;  // qualified, as claimed by the receipt
    std::string first_seen;
  };

  std::vector<EventEntry> events;
  std::vector<ReceiptEntry> receipts;

  bool empty() const { return events.empty() && receipts.empty(); }
};

/// A witness receipt message plus its couplet, ready for dissemination.
struct WitnessReceipt {
  KeyEvent receipt;                 // ilk rcpt
  std::vector<std::uint8_t> bytes;  // serialized receipt message
  Couplet couplet;
};

/// Builds a witness receipt over stored event bytes. The witness identity is
/// its non-transferable prefix; the couplet signature covers the event bytes.
WitnessReceipt make_witness_receipt(const std::string& event_prefix, std::uint64_t sn,
                                    const std::string& event_digest,
                                    std::span<const std::uint8_t> event_bytes,
                                    const KeyBank& witness_bank,
                                    SerKind kind = SerKind::JSON);

struct ValidatorReceipt {
  KeyEvent receipt;  // ilk vrct
  std::vector<std::uint8_t> bytes;
  std::vector<IndexedSignature> sigs;
};

ValidatorReceipt make_validator_receipt(const std::string& event_prefix, std::uint64_t sn,
                                        const std::string& event_digest,
                                        std::span<const std::uint8_t> event_bytes,
                                        const Controller& validator,
                                        SerKind kind = SerKind::JSON);

class KERLStore {
 public:
  using Clock = std::function<std::string()>;

  struct Options {
    ProcessorOptions processor;
    bool escrow_receipts = false;  // hold receipts for events not yet seen
    std::size_t receipt_escrow_limit = 1024;
  };

  KERLStore();
  explicit KERLStore(Options options, Clock clock = nullptr);

  /// Verifies and persists; accepted events and their receipts are recorded
  /// durably (in the directory layout, when attached) before returning.
  ApplyOutcome append_first_seen(std::span<const std::uint8_t> event_bytes,
                                 std::vector<IndexedSignature> sigs);
  /// Event, signatures, and any attached couplets from one framed message.
  ApplyOutcome append_framed(const FramedMessage& msg);

  /// Accumulates consistent witness couplets for a stored event; returns the
  /// new couplet count. Inconsistent receipts land in the DEL. Unknown events
  /// raise LogError{UnknownEvent} unless receipt escrow is enabled.
  std::size_t ingest_receipt(const KeyEvent& receipt, const std::vector<Couplet>& couplets);
  std::size_t ingest_couplets(const std::string& prefix, std::uint64_t sn,
                              const std::string& digest, const std::vector<Couplet>& couplets);

  /// Validator (vrct) receipts verify against the validator's own key state
  /// held in this store; they accumulate per event.
  std::size_t ingest_validator_receipt(const ValidatorReceipt& receipt);

  /// Re-runs the verifier from genesis over the stored trunk; throws
  /// LogError{CorruptLog} if anything no longer verifies, otherwise returns
  /// the final state (always equal to the live state).
  KeyState replay_verify(const std::string& prefix) const;

  /// Framed text stream of every trunk event with controller signatures and
  /// accumulated receipt couplets.
  std::string export_kerl(const std::string& prefix) const;
  std::vector<ApplyOutcome> import_kerl(std::string_view stream);

  void save(const std::filesystem::path& dir) const;
  static KERLStore load(const std::filesystem::path& dir) {
    return load(dir, Options{}, nullptr);
  }
  static KERLStore load(const std::filesystem::path& dir, Options options, Clock clock);

  // Queries.
  Processor& core() { return core_; }
  const Processor& core() const { return core_; }
  const KeyState* state(const std::string& prefix) const { return core_.state(prefix); }
  std::size_t couplet_count(const std::string& prefix, std::uint64_t sn) const;
  std::vector<std::string> couplet_witnesses(const std::string& prefix, std::uint64_t sn) const;
  std::size_t vrct_count(const std::string& prefix, std::uint64_t sn) const;
  std::string first_seen(const std::string& prefix, const std::string& digest) const;
  bool accountable(const std::string& prefix, std::uint64_t sn) const;  // disputed branch
  const DELStore& del() const { return del_; }

  /// One digest per appended record, in append order; the chain over any
  /// prefix of it is invariant under all later operations.
  const std::vector<std::string>& append_log() const { return append_log_; }
  std::string append_hash() const;

 private:
  struct Meta {
    std::string first_seen;
    std::vector<Couplet> couplets;
    std::vector<ValidatorReceipt> vrcts;
    bool accountable = false;
  };

  const EventRecord* find_record(const std::string& prefix, std::uint64_t sn,
                                 const std::string& digest, bool* disputed = nullptr) const;
  Meta& meta_of(const std::string& prefix, const std::string& digest);
  const Meta* meta_of(const std::string& prefix, const std::string& digest) const;
  void note_append(const std::string& digest);

  Options options_;
  Clock clock_;
  Processor core_;
  std::map<std::pair<std::string, std::string>, Meta> meta_;  // (prefix, digest)
  DELStore del_;
  std::vector<std::string> append_log_;
  std::size_t duplicity_seen_ = 0;
  std::vector<std::pair<KeyEvent, std::vector<Couplet>>> receipt_escrow_;
};

/// ISO-8601 UTC with microseconds: YYYY-MM-DDTHH:MM:SS.mmmmmm+00:00.
std::string iso8601_now();

}  // namespace keri
