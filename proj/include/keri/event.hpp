// SPDX-License-Identifier: Apache-2.0
//
// Key events, seals, and receipts: canonical full-event serialization in
// JSON/CBOR/MsgPack, extracted-element serialization for digests, event
// digesting, and the CRLF-CRLF framed text stream with attached signatures.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "keri/matter.hpp"
#include "keri/threshold.hpp"

namespace keri {

using OJson = nlohmann::ordered_json;

class EventError : public std::runtime_error {
 public:
  enum class Kind {
    UnknownKind,
    FieldMissing,
    BadVersionString,
    SizeMismatch,
    MalformedBody,
    MissingSeparator,
    CountMismatch,
  };
  EventError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

enum class SerKind { JSON, CBOR, MGPK };

std::string_view ser_kind_token(SerKind kind);
SerKind ser_kind_from_token(std::string_view token);

struct VersionString {
  int major = 1;
  int minor = 0;
  SerKind kind = SerKind::JSON;
  std::size_t size = 0;

  /// Fixed 17-character form, e.g. "KERI10JSON0000fb_".
  std::string text() const;
  static VersionString parse(std::string_view text);
};

enum class Ilk { icp, rot, ixn, dip, drt, rcpt, vrct };

std::string_view ilk_token(Ilk ilk);
Ilk ilk_from_token(std::string_view token);
bool is_establishment(Ilk ilk);

// ---------------------------------------------------------------------------
// Seals

struct DigestSeal {
  std::string digest;
  bool operator==(const DigestSeal&) const = default;
};

struct RootSeal {
  std::string root;
  bool operator==(const RootSeal&) const = default;
};

struct EventSeal {
  std::string prefix;
  std::uint64_t sn = 0;
  std::string digest;
  bool operator==(const EventSeal&) const = default;
};

/// The four values that uniquely locate an event in a log.
struct LocationSeal {
  std::string prefix;
  std::uint64_t sn = 0;
  Ilk ilk = Ilk::ixn;
  std::string prior_digest;
  bool operator==(const LocationSeal&) const = default;
};

using Seal = std::variant<DigestSeal, RootSeal, EventSeal, LocationSeal>;

OJson seal_to_json(const Seal& seal);
Seal seal_from_json(const OJson& j);
void seal_extract(const Seal& seal, std::string& out);

// ---------------------------------------------------------------------------
// Sequence numbers: lowercase hex text, no leading zeros.

std::string sn_text(std::uint64_t sn);
std::uint64_t sn_parse(std::string_view text);

// ---------------------------------------------------------------------------
// Key event

struct KeyEvent {
  std::string prefix;        // qualified identifier text
  std::uint64_t sn = 0;
  std::string prior_digest;  // empty only for icp/dip at sn 0
  Ilk ilk = Ilk::icp;

  // Establishment body (icp, rot, dip, drt)
  SigningThreshold sith;
  std::vector<std::string> keys;   // qualified public keys
  std::string next_digest;         // empty marks the identifier non-transferable
  std::uint32_t toad = 0;
  std::vector<std::string> wits;   // icp/dip
  std::vector<std::string> cuts;   // rot/drt
  std::vector<std::string> adds;   // rot/drt
  std::vector<std::string> cnfg;   // icp/dip traits
  std::vector<Seal> seals;         // rot/drt/ixn payload
  std::optional<LocationSeal> delegator_seal;  // dip/drt

  // Receipt body (rcpt, vrct)
  std::string event_digest;
  std::optional<EventSeal> validator_seal;  // vrct

  bool operator==(const KeyEvent&) const = default;
};

/// Canonical serialization; the version string (first field) declares the
/// kind and the exact byte length of the output.
std::vector<std::uint8_t> serialize(const KeyEvent& event, SerKind kind);

/// Sniffs the version string near the start, consumes exactly its declared
/// size, and inverts serialize.
KeyEvent deserialize(std::span<const std::uint8_t> bytes);

/// Version string found near the head of a serialized event.
VersionString sniff_version(std::span<const std::uint8_t> bytes);

/// Depth-first concatenation of element value texts.
class Extractor {
 public:
  void add(std::string_view value) { out_ += value; }
  void add_list(const std::vector<std::string>& values) {
    for (const auto& v : values) out_ += v;
  }
  const std::string& text() const { return out_; }

 private:
  std::string out_;
};

/// Digest over the exact serialized bytes of an event.
QualifiedMaterial digest_event(std::span<const std::uint8_t> event_bytes,
                               std::string_view digest_code);

/// Commitment to the next (sith, keys): digest of their extracted texts.
QualifiedMaterial next_digest(const SigningThreshold& sith,
                              const std::vector<std::string>& keys,
                              std::string_view digest_code);

// ---------------------------------------------------------------------------
// Framing (§16.3): event bytes, CRLF CRLF, a count code, attached qualified
// indexed signatures, then optionally a couplet count and witness couplets.

struct Couplet {
  std::string witness_prefix;       // qualified non-transferable prefix
  QualifiedMaterial signature;      // e.g. 0B Ed25519 signature
  bool operator==(const Couplet&) const = default;
};

struct FramedMessage {
  std::vector<std::uint8_t> event_bytes;
  std::vector<IndexedSignature> signatures;
  std::vector<Couplet> couplets;
  bool has_couplet_section = false;
};

std::string frame(std::span<const std::uint8_t> event_bytes,
                  const std::vector<IndexedSignature>& signatures);
std::string frame(std::span<const std::uint8_t> event_bytes,
                  const std::vector<IndexedSignature>& signatures,
                  const std::vector<Couplet>& couplets);

/// Parses one framed message starting at `text[0]`; sets `consumed`.
FramedMessage unframe_one(std::string_view text, std::size_t& consumed);
std::vector<FramedMessage> unframe_all(std::string_view text);

}  // namespace keri
