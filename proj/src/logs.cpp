// SPDX-License-Identifier: Apache-2.0

#include "keri/logs.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include "keri/base64.hpp"
#include "keri/blake3.hpp"
#include "keri/crypto.hpp"

namespace keri {

std::string iso8601_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto micros = duration_cast<microseconds>(now.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(micros / 1000000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04u-%02u-%02uT%02u:%02u:%02u.%06u+00:00",
                static_cast<unsigned>(tm.tm_year + 1900), static_cast<unsigned>(tm.tm_mon + 1),
                static_cast<unsigned>(tm.tm_mday), static_cast<unsigned>(tm.tm_hour),
                static_cast<unsigned>(tm.tm_min), static_cast<unsigned>(tm.tm_sec),
                static_cast<unsigned>(micros % 1000000));
  return buf;
}

WitnessReceipt make_witness_receipt(const std::string& event_prefix, std::uint64_t sn,
                                    const std::string& event_digest,
                                    std::span<const std::uint8_t> event_bytes,
                                    const KeyBank& witness_bank, SerKind kind) {
  WitnessReceipt out;
  out.receipt.prefix = event_prefix;
  out.receipt.sn = sn;
  out.receipt.ilk = Ilk::rcpt;
  out.receipt.event_digest = event_digest;
  out.bytes = serialize(out.receipt, kind);

  const auto kp = witness_bank.key(0);
  const auto sig = crypto::ed25519_sign(kp.secret_key, event_bytes);
  out.couplet.witness_prefix = witness_bank.qualified_public(0, /*transferable=*/false);
  out.couplet.signature = QualifiedMaterial{"0B", {sig.begin(), sig.end()}};
  return out;
}

ValidatorReceipt make_validator_receipt(const std::string& event_prefix, std::uint64_t sn,
                                        const std::string& event_digest,
                                        std::span<const std::uint8_t> event_bytes,
                                        const Controller& validator, SerKind kind) {
  ValidatorReceipt out;
  out.receipt.prefix = event_prefix;
  out.receipt.sn = sn;
  out.receipt.ilk = Ilk::vrct;
  out.receipt.event_digest = event_digest;
  out.receipt.validator_seal =
      EventSeal{validator.prefix(), validator.sn(), validator.latest_digest()};
  out.bytes = serialize(out.receipt, kind);
  out.sigs = validator.sign(event_bytes);
  return out;
}

KERLStore::KERLStore() : KERLStore(Options{}, nullptr) {}

KERLStore::KERLStore(Options options, Clock clock)
    : options_(std::move(options)),
      clock_(clock ? std::move(clock) : Clock(&iso8601_now)),
      core_(options_.processor) {}

void KERLStore::note_append(const std::string& digest) { append_log_.push_back(digest); }

std::string KERLStore::append_hash() const {
  Blake3 hasher;
  for (const auto& digest : append_log_) {
    hasher.update(std::span(reinterpret_cast<const std::uint8_t*>(digest.data()), digest.size()));
  }
  std::array<std::uint8_t, 32> out{};
  hasher.finalize(out);
  return encode(QualifiedMaterial{"E", {out.begin(), out.end()}});
}

ApplyOutcome KERLStore::append_first_seen(std::span<const std::uint8_t> event_bytes,
                                          std::vector<IndexedSignature> sigs) {
  ApplyOutcome outcome = core_.apply(event_bytes, std::move(sigs));
  if (outcome.disposition == Disposition::AcceptedFirstSeen ||
      outcome.disposition == Disposition::SupersedingRecovery) {
    meta_of(outcome.prefix, outcome.digest).first_seen = clock_();
    note_append(outcome.digest);
    if (outcome.disposition == Disposition::SupersedingRecovery) {
      // Disputed events that already reached the tally stay accountable.
      for (const EventRecord& rec : core_.disputed(outcome.prefix)) {
        Meta& m = meta_of(outcome.prefix, rec.digest);
        if (m.couplets.size() >= outcome.toad_at_recovery && outcome.toad_at_recovery > 0) {
          m.accountable = true;
        }
      }
    }
    // Drain receipt escrow for anything that just became known.
    if (!receipt_escrow_.empty()) {
      auto held = std::move(receipt_escrow_);
      receipt_escrow_.clear();
      for (auto& [receipt, couplets] : held) {
        try {
          ingest_receipt(receipt, couplets);
        } catch (const LogError&) {
          // still unknown: drop
        }
      }
    }
  }
  // Mirror newly detected duplicity into the DEL.
  while (duplicity_seen_ < core_.duplicity().size()) {
    const auto& entry = core_.duplicity()[duplicity_seen_++];
    del_.events.push_back(DELStore::EventEntry{entry.prefix, entry.sn, entry.original_bytes,
                                               entry.conflicting_bytes, entry.conflicting_sigs,
                                               clock_()});
  }
  return outcome;
}

ApplyOutcome KERLStore::append_framed(const FramedMessage& msg) {
  ApplyOutcome outcome = append_first_seen(msg.event_bytes, msg.signatures);
  if (!msg.couplets.empty() &&
      (outcome.disposition == Disposition::AcceptedFirstSeen ||
       outcome.disposition == Disposition::SupersedingRecovery ||
       outcome.disposition == Disposition::DuplicateIdentical)) {
    ingest_couplets(outcome.prefix, outcome.sn, outcome.digest, msg.couplets);
  }
  return outcome;
}

const EventRecord* KERLStore::find_record(const std::string& prefix, std::uint64_t sn,
                                          const std::string& digest, bool* disputed) const {
  const auto& trunk = core_.trunk(prefix);
  if (sn < trunk.size() && trunk[static_cast<std::size_t>(sn)].digest == digest) {
    if (disputed) *disputed = false;
    return &trunk[static_cast<std::size_t>(sn)];
  }
  for (const EventRecord& rec : core_.disputed(prefix)) {
    if (rec.event.sn == sn && rec.digest == digest) {
      if (disputed) *disputed = true;
      return &rec;
    }
  }
  return nullptr;
}

KERLStore::Meta& KERLStore::meta_of(const std::string& prefix, const std::string& digest) {
  return meta_[{prefix, digest}];
}

const KERLStore::Meta* KERLStore::meta_of(const std::string& prefix,
                                          const std::string& digest) const {
  auto it = meta_.find({prefix, digest});
  return it == meta_.end() ? nullptr : &it->second;
}

std::size_t KERLStore::ingest_couplets(const std::string& prefix, std::uint64_t sn,
                                       const std::string& digest,
                                       const std::vector<Couplet>& couplets) {
  const EventRecord* record = find_record(prefix, sn, digest);
  if (!record) {
    // A receipt for a version we hold nothing of, at a location we do hold:
    // that is witness duplicity evidence. Entirely unknown events may escrow.
    const auto& trunk = core_.trunk(prefix);
    if (sn < trunk.size()) {
      for (const Couplet& c : couplets) {
        del_.receipts.push_back(DELStore::ReceiptEntry{
            c.witness_prefix, prefix, sn, trunk[static_cast<std::size_t>(sn)].digest, digest,
            encode(c.signature), clock_()});
      }
      return 0;
    }
    throw LogError(LogError::Kind::UnknownEvent, "no stored event matches the receipt");
  }

  Meta& meta = meta_of(prefix, digest);
  std::size_t added = 0;
  for (const Couplet& c : couplets) {
    const bool seen = std::any_of(meta.couplets.begin(), meta.couplets.end(), [&](const auto& e) {
      return e.witness_prefix == c.witness_prefix;
    });
    if (seen) continue;
    // The couplet signature must verify against the key embedded in the
    // witness' non-transferable prefix.
    bool ok = false;
    try {
      const QualifiedMaterial wit = decode(c.witness_prefix);
      ok = is_nontransferable_code(wit.code) &&
           crypto::ed25519_verify(wit.raw, c.signature.raw, record->bytes);
    } catch (const CodecError&) {
      ok = false;
    }
    if (!ok) continue;
    meta.couplets.push_back(c);
    ++added;
  }
  return meta.couplets.size();
}

std::size_t KERLStore::ingest_receipt(const KeyEvent& receipt,
                                      const std::vector<Couplet>& couplets) {
  if (receipt.ilk != Ilk::rcpt) {
    throw LogError(LogError::Kind::UnknownEvent, "not a witness receipt message");
  }
  const auto& trunk = core_.trunk(receipt.prefix);
  const bool known_location = receipt.sn < trunk.size() ||
                              !core_.disputed(receipt.prefix).empty();
  if (!known_location && options_.escrow_receipts) {
    if (receipt_escrow_.size() >= options_.receipt_escrow_limit) {
      receipt_escrow_.erase(receipt_escrow_.begin());
    }
    receipt_escrow_.emplace_back(receipt, couplets);
    return 0;
  }
  return ingest_couplets(receipt.prefix, receipt.sn, receipt.event_digest, couplets);
}

std::size_t KERLStore::ingest_validator_receipt(const ValidatorReceipt& receipt) {
  const KeyEvent& event = receipt.receipt;
  if (event.ilk != Ilk::vrct || !event.validator_seal) {
    throw LogError(LogError::Kind::UnknownEvent, "not a validator receipt message");
  }
  const EventRecord* record = find_record(event.prefix, event.sn, event.event_digest);
  if (!record) throw LogError(LogError::Kind::UnknownEvent, "no stored event matches the receipt");

  // Verify against the validator's latest establishment state in this store.
  const KeyState* vstate = core_.state(event.validator_seal->prefix);
  if (!vstate) throw LogError(LogError::Kind::UnknownEvent, "validator key state unknown");
  const SigCheck check = verify_signatures(record->bytes, receipt.sigs, vstate->keys);
  if (check.valid.empty() || check.any_invalid) return vrct_count(event.prefix, event.sn);

  Meta& meta = meta_of(event.prefix, record->digest);
  const bool seen = std::any_of(meta.vrcts.begin(), meta.vrcts.end(), [&](const auto& v) {
    return v.receipt.validator_seal->prefix == event.validator_seal->prefix;
  });
  if (!seen) meta.vrcts.push_back(receipt);
  return meta.vrcts.size();
}

std::size_t KERLStore::couplet_count(const std::string& prefix, std::uint64_t sn) const {
  const auto& trunk = core_.trunk(prefix);
  if (sn < trunk.size()) {
    const Meta* m = meta_of(prefix, trunk[static_cast<std::size_t>(sn)].digest);
    if (m) return m->couplets.size();
  }
  for (const EventRecord& rec : core_.disputed(prefix)) {
    if (rec.event.sn == sn) {
      const Meta* m = meta_of(prefix, rec.digest);
      if (m) return m->couplets.size();
    }
  }
  return 0;
}

std::vector<std::string> KERLStore::couplet_witnesses(const std::string& prefix,
                                                      std::uint64_t sn) const {
  std::vector<std::string> out;
  const auto& trunk = core_.trunk(prefix);
  if (sn >= trunk.size()) return out;
  const Meta* m = meta_of(prefix, trunk[static_cast<std::size_t>(sn)].digest);
  if (!m) return out;
  for (const auto& c : m->couplets) out.push_back(c.witness_prefix);
  return out;
}

std::size_t KERLStore::vrct_count(const std::string& prefix, std::uint64_t sn) const {
  const auto& trunk = core_.trunk(prefix);
  if (sn >= trunk.size()) return 0;
  const Meta* m = meta_of(prefix, trunk[static_cast<std::size_t>(sn)].digest);
  return m ? m->vrcts.size() : 0;
}

std::string KERLStore::first_seen(const std::string& prefix, const std::string& digest) const {
  const Meta* m = meta_of(prefix, digest);
  return m ? m->first_seen : std::string{};
}

bool KERLStore::accountable(const std::string& prefix, std::uint64_t sn) const {
  for (const EventRecord& rec : core_.disputed(prefix)) {
    if (rec.event.sn == sn) {
      const Meta* m = meta_of(prefix, rec.digest);
      return m && m->accountable;
    }
  }
  return false;
}

KeyState KERLStore::replay_verify(const std::string& prefix) const {
  const auto& trunk = core_.trunk(prefix);
  if (trunk.empty()) throw LogError(LogError::Kind::CorruptLog, "empty log for " + prefix);

  Processor fresh(options_.processor);
  // Delegated events need their delegator's log; replaying against the live
  // core keeps that available without re-ordering cross-log histories.
  fresh.set_delegator_resolver([this](const std::string& p) { return core_.view(p); });
  for (const EventRecord& rec : trunk) {
    const ApplyOutcome out = fresh.apply(rec.bytes, rec.sigs);
    if (out.disposition != Disposition::AcceptedFirstSeen) {
      throw LogError(LogError::Kind::CorruptLog,
                     "stored event at sn " + std::to_string(rec.event.sn) +
                         " no longer verifies: " + out.reason);
    }
  }
  const KeyState* replayed = fresh.state(prefix);
  const KeyState* live = core_.state(prefix);
  if (!replayed || !live || replayed->to_json().dump() != live->to_json().dump()) {
    throw LogError(LogError::Kind::CorruptLog, "replayed state diverges from live state");
  }
  return *replayed;
}

std::string KERLStore::export_kerl(const std::string& prefix) const {
  std::string out;
  for (const EventRecord& rec : core_.trunk(prefix)) {
    const Meta* m = meta_of(prefix, rec.digest);
    static const std::vector<Couplet> none;
    out += frame(rec.bytes, rec.sigs, m ? m->couplets : none);
  }
  return out;
}

std::vector<ApplyOutcome> KERLStore::import_kerl(std::string_view stream) {
  std::vector<ApplyOutcome> outcomes;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    std::size_t consumed = 0;
    const FramedMessage msg = unframe_one(stream.substr(pos), consumed);
    pos += consumed;
    outcomes.push_back(append_framed(msg));
  }
  return outcomes;
}

// ---------------------------------------------------------------------------
// Plain-file persistence: dir/<prefix>/{events,disputed}/<sn16>.<digest>.json
// and dir/<prefix>/del/<n>.json. Hex sequence numbers are fixed width so the
// lexicographic file order is the numeric order.

namespace {

std::string b64_of_bytes(const std::vector<std::uint8_t>& bytes) {
  return b64::encode(bytes, /*pad=*/true);
}

std::vector<std::uint8_t> bytes_of_b64(const std::string& text) { return b64::decode(text); }

std::string fixed_hex(std::uint64_t sn) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(sn));
  return buf;
}

OJson sigs_to_json(const std::vector<IndexedSignature>& sigs) {
  OJson arr = OJson::array();
  for (const auto& s : sigs) arr.push_back(encode_indexed(s));
  return arr;
}

std::vector<IndexedSignature> sigs_from_json(const OJson& arr) {
  std::vector<IndexedSignature> out;
  for (const auto& s : arr) out.push_back(decode_indexed(s.get<std::string>()));
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw LogError(LogError::Kind::StorageFailure, "cannot write " + path.string());
  f << content;
  if (!f.good()) throw LogError(LogError::Kind::StorageFailure, "write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LogError(LogError::Kind::StorageFailure, "cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace

void KERLStore::save(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const std::string& prefix : core_.prefixes()) {
    const fs::path pdir = dir / prefix;
    fs::create_directories(pdir / "events");
    fs::create_directories(pdir / "disputed");
    fs::create_directories(pdir / "del");

    auto dump_record = [&](const fs::path& sub, const EventRecord& rec) {
      OJson j = OJson::object();
      j["event"] = b64_of_bytes(rec.bytes);
      j["sigs"] = sigs_to_json(rec.sigs);
      const Meta* m = meta_of(prefix, rec.digest);
      OJson couplets = OJson::array();
      OJson vrcts = OJson::array();
      if (m) {
        for (const auto& c : m->couplets) {
          couplets.push_back(OJson{{"w", c.witness_prefix}, {"s", encode(c.signature)}});
        }
        for (const auto& v : m->vrcts) {
          vrcts.push_back(OJson{{"r", b64_of_bytes(v.bytes)}, {"s", sigs_to_json(v.sigs)}});
        }
      }
      j["couplets"] = couplets;
      j["vrcts"] = vrcts;
      j["first_seen"] = m ? m->first_seen : "";
      j["accountable"] = m && m->accountable;
      write_file(sub / (fixed_hex(rec.event.sn) + "." + rec.digest + ".json"), j.dump());
    };

    for (const EventRecord& rec : core_.trunk(prefix)) dump_record(pdir / "events", rec);
    for (const EventRecord& rec : core_.disputed(prefix)) dump_record(pdir / "disputed", rec);

    std::size_t n = 0;
    for (const auto& entry : del_.events) {
      if (entry.prefix != prefix) continue;
      OJson j = OJson::object();
      j["sn"] = sn_text(entry.sn);
      j["original"] = b64_of_bytes(entry.original_bytes);
      j["conflicting"] = b64_of_bytes(entry.conflicting_bytes);
      j["sigs"] = sigs_to_json(entry.conflicting_sigs);
      j["first_seen"] = entry.first_seen;
      write_file(pdir / "del" / (fixed_hex(n++) + ".json"), j.dump());
    }
  }
}

KERLStore KERLStore::load(const std::filesystem::path& dir, Options options, Clock clock) {
  namespace fs = std::filesystem;
  KERLStore store(std::move(options), std::move(clock));
  if (!fs::exists(dir)) return store;

  // Collect and re-verify everything trunk-first in sn order per prefix;
  // disputed branches replay after their superseding trunks.
  struct Loaded {
    std::string prefix;
    OJson record;
    bool disputed;
  };
  std::vector<Loaded> records;
  for (const auto& pentry : fs::directory_iterator(dir)) {
    if (!pentry.is_directory()) continue;
    const std::string prefix = pentry.path().filename().string();
    for (const char* sub : {"events", "disputed"}) {
      const fs::path sdir = pentry.path() / sub;
      if (!fs::exists(sdir)) continue;
      std::vector<fs::path> files;
      for (const auto& f : fs::directory_iterator(sdir)) files.push_back(f.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        records.push_back(
            Loaded{prefix, OJson::parse(read_file(f)), std::string(sub) == "disputed"});
      }
    }
  }

  // Disputed records must be applied before the trunk's superseding rotation
  // replays over them; group: all disputed may simply re-apply after trunk
  // load fails chaining. Instead re-apply in the original order: trunk up to
  // the fork, then disputed, then the rest of the trunk. The simple and
  // correct general order is: per prefix, all events sorted by sn with
  // disputed ones before the trunk event at the same sn.
  std::stable_sort(records.begin(), records.end(), [](const Loaded& a, const Loaded& b) {
    if (a.prefix != b.prefix) return a.prefix < b.prefix;
    const auto sn_of = [](const Loaded& l) {
      const auto bytes = bytes_of_b64(l.record.at("event").get<std::string>());
      return sniff_version(bytes), deserialize(bytes).sn;
    };
    const std::uint64_t sa = sn_of(a), sb = sn_of(b);
    if (sa != sb) return sa < sb;
    return a.disputed && !b.disputed;
  });

  for (const auto& loaded : records) {
    const auto bytes = bytes_of_b64(loaded.record.at("event").get<std::string>());
    const auto sigs = sigs_from_json(loaded.record.at("sigs"));
    const ApplyOutcome out = store.core_.apply(bytes, sigs);
    if (out.disposition != Disposition::AcceptedFirstSeen &&
        out.disposition != Disposition::SupersedingRecovery) {
      throw LogError(LogError::Kind::CorruptLog,
                     "stored event failed re-verification: " + out.reason);
    }
    Meta& m = store.meta_of(loaded.prefix, out.digest);
    m.first_seen = loaded.record.at("first_seen").get<std::string>();
    m.accountable = loaded.record.at("accountable").get<bool>();
    for (const auto& c : loaded.record.at("couplets")) {
      m.couplets.push_back(
          Couplet{c.at("w").get<std::string>(), decode(c.at("s").get<std::string>())});
    }
    for (const auto& v : loaded.record.at("vrcts")) {
      ValidatorReceipt r;
      r.bytes = bytes_of_b64(v.at("r").get<std::string>());
      r.sigs = sigs_from_json(v.at("s"));
      r.receipt = deserialize(r.bytes);
      m.vrcts.push_back(std::move(r));
    }
    store.note_append(out.digest);
  }
  return store;
}

}  // namespace keri
