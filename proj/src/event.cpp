// SPDX-License-Identifier: Apache-2.0

#include "keri/event.hpp"

#include <algorithm>
#include <charconv>

#include "keri/crypto.hpp"

namespace keri {

namespace {

constexpr std::string_view kProtocol = "KERI";
constexpr std::size_t kVersionLength = 17;
constexpr std::string_view kSeparator = "\r\n\r\n";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

std::string_view ser_kind_token(SerKind kind) {
  switch (kind) {
    case SerKind::JSON: return "JSON";
    case SerKind::CBOR: return "CBOR";
    case SerKind::MGPK: return "MGPK";
  }
  throw EventError(EventError::Kind::UnknownKind, "bad serialization kind");
}

SerKind ser_kind_from_token(std::string_view token) {
  if (token == "JSON") return SerKind::JSON;
  if (token == "CBOR") return SerKind::CBOR;
  if (token == "MGPK") return SerKind::MGPK;
  throw EventError(EventError::Kind::UnknownKind,
                   "unknown serialization kind: " + std::string(token));
}

std::string VersionString::text() const {
  char buf[18];
  std::snprintf(buf, sizeof(buf), "KERI%1x%1x%s%06zx_", static_cast<unsigned>(major),
                static_cast<unsigned>(minor), std::string(ser_kind_token(kind)).c_str(), size);
  return std::string(buf, kVersionLength);
}

VersionString VersionString::parse(std::string_view text) {
  if (text.size() < kVersionLength || text.substr(0, 4) != kProtocol || text[16] != '_') {
    throw EventError(EventError::Kind::BadVersionString,
                     "bad version string: " + std::string(text.substr(0, std::min<std::size_t>(text.size(), 17))));
  }
  VersionString v;
  const int major = hex_value(text[4]);
  const int minor = hex_value(text[5]);
  if (major < 0 || minor < 0) {
    throw EventError(EventError::Kind::BadVersionString, "bad version digits");
  }
  v.major = major;
  v.minor = minor;
  v.kind = ser_kind_from_token(text.substr(6, 4));
  std::size_t size = 0;
  for (std::size_t i = 10; i < 16; ++i) {
    const int h = hex_value(text[i]);
    if (h < 0) throw EventError(EventError::Kind::BadVersionString, "bad size digits");
    size = size * 16 + static_cast<std::size_t>(h);
  }
  v.size = size;
  return v;
}

std::string_view ilk_token(Ilk ilk) {
  switch (ilk) {
    case Ilk::icp: return "icp";
    case Ilk::rot: return "rot";
    case Ilk::ixn: return "ixn";
    case Ilk::dip: return "dip";
    case Ilk::drt: return "drt";
    case Ilk::rcpt: return "rcpt";
    case Ilk::vrct: return "vrct";
  }
  throw EventError(EventError::Kind::MalformedBody, "bad ilk");
}

Ilk ilk_from_token(std::string_view token) {
  if (token == "icp") return Ilk::icp;
  if (token == "rot") return Ilk::rot;
  if (token == "ixn") return Ilk::ixn;
  if (token == "dip") return Ilk::dip;
  if (token == "drt") return Ilk::drt;
  if (token == "rcpt") return Ilk::rcpt;
  if (token == "vrct") return Ilk::vrct;
  throw EventError(EventError::Kind::MalformedBody, "unknown ilk: " + std::string(token));
}

bool is_establishment(Ilk ilk) {
  return ilk == Ilk::icp || ilk == Ilk::rot || ilk == Ilk::dip || ilk == Ilk::drt;
}

std::string sn_text(std::uint64_t sn) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), sn, 16);
  return std::string(buf, ptr);
}

std::uint64_t sn_parse(std::string_view text) {
  if (text.empty() || text.size() > 16) {
    throw EventError(EventError::Kind::MalformedBody, "bad sequence number: " + std::string(text));
  }
  if (text.size() > 1 && text[0] == '0') {
    throw EventError(EventError::Kind::MalformedBody, "sequence number has leading zeros");
  }
  std::uint64_t sn = 0;
  for (char c : text) {
    const int h = hex_value(c);
    if (h < 0) {
      throw EventError(EventError::Kind::MalformedBody, "bad sequence number: " + std::string(text));
    }
    sn = sn * 16 + static_cast<std::uint64_t>(h);
  }
  return sn;
}

// ---------------------------------------------------------------------------
// Seals

OJson seal_to_json(const Seal& seal) {
  OJson j = OJson::object();
  if (const auto* d = std::get_if<DigestSeal>(&seal)) {
    j["d"] = d->digest;
  } else if (const auto* r = std::get_if<RootSeal>(&seal)) {
    j["rd"] = r->root;
  } else if (const auto* e = std::get_if<EventSeal>(&seal)) {
    j["i"] = e->prefix;
    j["s"] = sn_text(e->sn);
    j["d"] = e->digest;
  } else if (const auto* l = std::get_if<LocationSeal>(&seal)) {
    j["i"] = l->prefix;
    j["s"] = sn_text(l->sn);
    j["t"] = std::string(ilk_token(l->ilk));
    j["p"] = l->prior_digest;
  }
  return j;
}

Seal seal_from_json(const OJson& j) {
  if (!j.is_object()) throw EventError(EventError::Kind::MalformedBody, "seal must be a mapping");
  if (j.contains("t")) {
    LocationSeal l;
    l.prefix = j.at("i").get<std::string>();
    l.sn = sn_parse(j.at("s").get<std::string>());
    l.ilk = ilk_from_token(j.at("t").get<std::string>());
    l.prior_digest = j.at("p").get<std::string>();
    return l;
  }
  if (j.contains("i")) {
    EventSeal e;
    e.prefix = j.at("i").get<std::string>();
    e.sn = sn_parse(j.at("s").get<std::string>());
    e.digest = j.at("d").get<std::string>();
    return e;
  }
  if (j.contains("rd")) return RootSeal{j.at("rd").get<std::string>()};
  if (j.contains("d")) return DigestSeal{j.at("d").get<std::string>()};
  throw EventError(EventError::Kind::MalformedBody, "unrecognized seal shape");
}

void seal_extract(const Seal& seal, std::string& out) {
  if (const auto* d = std::get_if<DigestSeal>(&seal)) {
    out += d->digest;
  } else if (const auto* r = std::get_if<RootSeal>(&seal)) {
    out += r->root;
  } else if (const auto* e = std::get_if<EventSeal>(&seal)) {
    out += e->prefix;
    out += sn_text(e->sn);
    out += e->digest;
  } else if (const auto* l = std::get_if<LocationSeal>(&seal)) {
    out += l->prefix;
    out += sn_text(l->sn);
    out += ilk_token(l->ilk);
    out += l->prior_digest;
  }
}

// ---------------------------------------------------------------------------
// Full event serialization

namespace {

OJson seals_to_json(const std::vector<Seal>& seals) {
  OJson arr = OJson::array();
  for (const auto& s : seals) arr.push_back(seal_to_json(s));
  return arr;
}

OJson strings_to_json(const std::vector<std::string>& values) {
  OJson arr = OJson::array();
  for (const auto& v : values) arr.push_back(v);
  return arr;
}

void put_establishment(OJson& j, const KeyEvent& event) {
  j["kt"] = event.sith.to_json();
  j["k"] = strings_to_json(event.keys);
  j["n"] = event.next_digest;
  j["wt"] = std::to_string(event.toad);
}

OJson event_to_json(const KeyEvent& event, const VersionString& version) {
  OJson j = OJson::object();
  j["v"] = version.text();
  j["i"] = event.prefix;
  j["s"] = sn_text(event.sn);
  switch (event.ilk) {
    case Ilk::icp:
    case Ilk::dip:
      j["t"] = std::string(ilk_token(event.ilk));
      put_establishment(j, event);
      j["w"] = strings_to_json(event.wits);
      j["c"] = strings_to_json(event.cnfg);
      if (event.ilk == Ilk::dip) {
        if (!event.delegator_seal) {
          throw EventError(EventError::Kind::FieldMissing, "dip requires a delegator seal");
        }
        j["da"] = seal_to_json(*event.delegator_seal);
      }
      break;
    case Ilk::rot:
    case Ilk::drt:
      j["p"] = event.prior_digest;
      j["t"] = std::string(ilk_token(event.ilk));
      put_establishment(j, event);
      j["wr"] = strings_to_json(event.cuts);
      j["wa"] = strings_to_json(event.adds);
      j["a"] = seals_to_json(event.seals);
      if (event.ilk == Ilk::drt) {
        if (!event.delegator_seal) {
          throw EventError(EventError::Kind::FieldMissing, "drt requires a delegator seal");
        }
        j["da"] = seal_to_json(*event.delegator_seal);
      }
      break;
    case Ilk::ixn:
      j["p"] = event.prior_digest;
      j["t"] = std::string(ilk_token(event.ilk));
      j["a"] = seals_to_json(event.seals);
      break;
    case Ilk::rcpt:
      j["t"] = std::string(ilk_token(event.ilk));
      j["d"] = event.event_digest;
      break;
    case Ilk::vrct:
      j["t"] = std::string(ilk_token(event.ilk));
      j["d"] = event.event_digest;
      if (!event.validator_seal) {
        throw EventError(EventError::Kind::FieldMissing, "vrct requires a validator seal");
      }
      j["a"] = seal_to_json(Seal{*event.validator_seal});
      break;
  }
  return j;
}

std::vector<std::uint8_t> dump(const OJson& j, SerKind kind) {
  switch (kind) {
    case SerKind::JSON: {
      const std::string text = j.dump();  // no insignificant whitespace
      return std::vector<std::uint8_t>(text.begin(), text.end());
    }
    case SerKind::CBOR: return OJson::to_cbor(j);
    case SerKind::MGPK: return OJson::to_msgpack(j);
  }
  throw EventError(EventError::Kind::UnknownKind, "bad serialization kind");
}

std::vector<std::string> expected_labels(Ilk ilk) {
  switch (ilk) {
    case Ilk::icp: return {"v", "i", "s", "t", "kt", "k", "n", "wt", "w", "c"};
    case Ilk::rot: return {"v", "i", "s", "p", "t", "kt", "k", "n", "wt", "wr", "wa", "a"};
    case Ilk::ixn: return {"v", "i", "s", "p", "t", "a"};
    case Ilk::dip: return {"v", "i", "s", "t", "kt", "k", "n", "wt", "w", "c", "da"};
    case Ilk::drt: return {"v", "i", "s", "p", "t", "kt", "k", "n", "wt", "wr", "wa", "a", "da"};
    case Ilk::rcpt: return {"v", "i", "s", "t", "d"};
    case Ilk::vrct: return {"v", "i", "s", "t", "d", "a"};
  }
  throw EventError(EventError::Kind::MalformedBody, "bad ilk");
}

std::vector<std::string> string_list(const OJson& j, const char* label) {
  if (!j.is_array()) {
    throw EventError(EventError::Kind::MalformedBody, std::string(label) + " must be a list");
  }
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize(const KeyEvent& event, SerKind kind) {
  VersionString version{1, 0, kind, 0};
  std::vector<std::uint8_t> first = dump(event_to_json(event, version), kind);
  version.size = first.size();
  // The size field is fixed width, so re-serializing cannot change the length.
  std::vector<std::uint8_t> out = dump(event_to_json(event, version), kind);
  if (out.size() != version.size) {
    throw EventError(EventError::Kind::SizeMismatch, "version size did not stabilize");
  }
  return out;
}

VersionString sniff_version(std::span<const std::uint8_t> bytes) {
  const std::size_t window = std::min<std::size_t>(bytes.size(), 32);
  for (std::size_t i = 0; i + kVersionLength <= window; ++i) {
    if (std::equal(kProtocol.begin(), kProtocol.end(), bytes.begin() + static_cast<long>(i))) {
      return VersionString::parse(std::string_view(
          reinterpret_cast<const char*>(bytes.data()) + i, kVersionLength));
    }
  }
  throw EventError(EventError::Kind::BadVersionString, "no version string near start of event");
}

KeyEvent deserialize(std::span<const std::uint8_t> bytes) {
  const VersionString version = sniff_version(bytes);
  if (bytes.size() < version.size) {
    throw EventError(EventError::Kind::SizeMismatch,
                     "declared size " + std::to_string(version.size) + " exceeds available " +
                         std::to_string(bytes.size()) + " bytes");
  }
  std::span<const std::uint8_t> body = bytes.first(version.size);
  OJson j;
  try {
    switch (version.kind) {
      case SerKind::JSON:
        j = OJson::parse(std::string_view(reinterpret_cast<const char*>(body.data()), body.size()));
        break;
      case SerKind::CBOR: j = OJson::from_cbor(body); break;
      case SerKind::MGPK: j = OJson::from_msgpack(body); break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw EventError(EventError::Kind::SizeMismatch,
                     std::string("event body does not parse to its declared size: ") + e.what());
  }
  if (!j.is_object() || j.empty()) {
    throw EventError(EventError::Kind::MalformedBody, "event is not a mapping");
  }

  try {
    auto it = j.begin();
    if (it.key() != "v") {
      throw EventError(EventError::Kind::BadVersionString, "first field must be the version string");
    }
    const VersionString declared = VersionString::parse(it.value().get<std::string>());
    if (declared.size != version.size || declared.kind != version.kind) {
      throw EventError(EventError::Kind::SizeMismatch, "version string does not match framing");
    }

    KeyEvent event;
    event.prefix = j.at("i").get<std::string>();
    event.sn = sn_parse(j.at("s").get<std::string>());
    event.ilk = ilk_from_token(j.at("t").get<std::string>());

    // Field creation order is canonical per ilk; enforce it strictly.
    const auto labels = expected_labels(event.ilk);
    if (j.size() != labels.size()) {
      throw EventError(EventError::Kind::MalformedBody, "wrong field count for ilk");
    }
    std::size_t idx = 0;
    for (auto field = j.begin(); field != j.end(); ++field, ++idx) {
      if (field.key() != labels[idx]) {
        throw EventError(EventError::Kind::MalformedBody,
                         "field '" + field.key() + "' out of canonical order");
      }
    }

    if (event.ilk == Ilk::rot || event.ilk == Ilk::drt || event.ilk == Ilk::ixn) {
      event.prior_digest = j.at("p").get<std::string>();
    }
    if (is_establishment(event.ilk)) {
      event.sith = SigningThreshold::from_json(j.at("kt"));
      event.keys = string_list(j.at("k"), "k");
      event.next_digest = j.at("n").get<std::string>();
      const std::string toad_text = j.at("wt").get<std::string>();
      std::uint32_t toad = 0;
      auto [ptr, ec] = std::from_chars(toad_text.data(), toad_text.data() + toad_text.size(), toad);
      if (ec != std::errc{} || ptr != toad_text.data() + toad_text.size()) {
        throw EventError(EventError::Kind::MalformedBody, "bad tally: " + toad_text);
      }
      event.toad = toad;
    }
    switch (event.ilk) {
      case Ilk::icp:
      case Ilk::dip:
        event.wits = string_list(j.at("w"), "w");
        event.cnfg = string_list(j.at("c"), "c");
        if (event.ilk == Ilk::dip) {
          event.delegator_seal = std::get<LocationSeal>(seal_from_json(j.at("da")));
        }
        break;
      case Ilk::rot:
      case Ilk::drt:
        event.cuts = string_list(j.at("wr"), "wr");
        event.adds = string_list(j.at("wa"), "wa");
        for (const auto& s : j.at("a")) event.seals.push_back(seal_from_json(s));
        if (event.ilk == Ilk::drt) {
          event.delegator_seal = std::get<LocationSeal>(seal_from_json(j.at("da")));
        }
        break;
      case Ilk::ixn:
        for (const auto& s : j.at("a")) event.seals.push_back(seal_from_json(s));
        break;
      case Ilk::rcpt:
        event.event_digest = j.at("d").get<std::string>();
        break;
      case Ilk::vrct:
        event.event_digest = j.at("d").get<std::string>();
        event.validator_seal = std::get<EventSeal>(seal_from_json(j.at("a")));
        break;
    }

    if ((event.ilk == Ilk::icp || event.ilk == Ilk::dip) && event.sn != 0) {
      throw EventError(EventError::Kind::MalformedBody, "inception must be at sequence number 0");
    }
    return event;
  } catch (const nlohmann::json::exception& e) {
    throw EventError(EventError::Kind::MalformedBody, std::string("malformed event body: ") + e.what());
  } catch (const std::bad_variant_access&) {
    throw EventError(EventError::Kind::MalformedBody, "seal variant does not match its field");
  }
}

QualifiedMaterial digest_event(std::span<const std::uint8_t> event_bytes,
                               std::string_view digest_code) {
  if (!crypto::is_digest_code(digest_code)) {
    throw CodecError(CodecError::Kind::UnknownCode,
                     "not a registered digest code: " + std::string(digest_code));
  }
  return crypto::qualified_digest(digest_code, event_bytes);
}

QualifiedMaterial next_digest(const SigningThreshold& sith, const std::vector<std::string>& keys,
                              std::string_view digest_code) {
  Extractor ex;
  ex.add(sith.extract_text());
  ex.add_list(keys);
  const auto& text = ex.text();
  return digest_event(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()),
                      digest_code);
}

// ---------------------------------------------------------------------------
// Framing

std::string frame(std::span<const std::uint8_t> event_bytes,
                  const std::vector<IndexedSignature>& signatures) {
  std::string out(reinterpret_cast<const char*>(event_bytes.data()), event_bytes.size());
  out += kSeparator;
  out += encode_count(CountCode{CountKind::AttachedSignatures,
                                static_cast<int>(signatures.size())});
  for (const auto& sig : signatures) out += encode_indexed(sig);
  return out;
}

std::string frame(std::span<const std::uint8_t> event_bytes,
                  const std::vector<IndexedSignature>& signatures,
                  const std::vector<Couplet>& couplets) {
  std::string out = frame(event_bytes, signatures);
  out += encode_count(CountCode{CountKind::AttachedReceiptCouplets,
                                static_cast<int>(couplets.size())});
  for (const auto& c : couplets) {
    out += c.witness_prefix;
    out += encode(c.signature);
  }
  return out;
}

FramedMessage unframe_one(std::string_view text, std::size_t& consumed) {
  std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(text.data()),
                                      text.size());
  const VersionString version = sniff_version(bytes);
  if (text.size() < version.size + kSeparator.size()) {
    throw EventError(EventError::Kind::MissingSeparator, "stream ends inside framed event");
  }
  if (text.substr(version.size, kSeparator.size()) != kSeparator) {
    throw EventError(EventError::Kind::MissingSeparator,
                     "expected CR LF CR LF after serialized event");
  }
  FramedMessage msg;
  msg.event_bytes.assign(bytes.begin(), bytes.begin() + static_cast<long>(version.size));
  std::size_t pos = version.size + kSeparator.size();

  if (text.size() < pos + 4) {
    throw EventError(EventError::Kind::CountMismatch, "missing signature count code");
  }
  CountCode sig_count;
  try {
    sig_count = decode_count(text.substr(pos, 4), CountKind::AttachedSignatures);
  } catch (const CodecError& e) {
    throw EventError(EventError::Kind::CountMismatch,
                     std::string("bad signature count code: ") + e.what());
  }
  pos += 4;
  for (int i = 0; i < sig_count.count; ++i) {
    std::size_t len;
    try {
      len = indexed_length_at(text.substr(pos));
      if (text.size() < pos + len) {
        throw CodecError(CodecError::Kind::Truncated, "stream ends inside signature");
      }
      msg.signatures.push_back(decode_indexed(text.substr(pos, len)));
    } catch (const CodecError& e) {
      throw EventError(EventError::Kind::CountMismatch,
                       std::string("declared signature count exceeds stream: ") + e.what());
    }
    pos += len;
  }

  // Optional receipt-couplet section.
  if (text.size() >= pos + 4 && text.substr(pos, 2) == "-A") {
    msg.has_couplet_section = true;
    const CountCode couplet_count =
        decode_count(text.substr(pos, 4), CountKind::AttachedReceiptCouplets);
    pos += 4;
    for (int i = 0; i < couplet_count.count; ++i) {
      try {
        const std::size_t plen = qualified_length_at(text.substr(pos));
        if (text.size() < pos + plen) {
          throw CodecError(CodecError::Kind::Truncated, "stream ends inside couplet prefix");
        }
        std::string prefix(text.substr(pos, plen));
        pos += plen;
        const std::size_t slen = qualified_length_at(text.substr(pos));
        if (text.size() < pos + slen) {
          throw CodecError(CodecError::Kind::Truncated, "stream ends inside couplet signature");
        }
        QualifiedMaterial sig = decode(text.substr(pos, slen));
        pos += slen;
        msg.couplets.push_back(Couplet{std::move(prefix), std::move(sig)});
      } catch (const CodecError& e) {
        throw EventError(EventError::Kind::CountMismatch,
                         std::string("declared couplet count exceeds stream: ") + e.what());
      }
    }
  }
  consumed = pos;
  return msg;
}

std::vector<FramedMessage> unframe_all(std::string_view text) {
  std::vector<FramedMessage> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t consumed = 0;
    out.push_back(unframe_one(text.substr(pos), consumed));
    pos += consumed;
  }
  return out;
}

}  // namespace keri
