// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: create identifiers and key events against a local
// keystore and KEL file, verify logs, and run simulation scenarios.
//
// Exit codes: 0 ok, 1 parse error, 2 verification failure,
// 3 duplicity detected, 4 scenario assertion failed.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "keri/blake3.hpp"
#include "keri/controller.hpp"
#include "keri/logs.hpp"
#include "keri/sim.hpp"

namespace fs = std::filesystem;
using namespace keri;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitVerify = 2;
constexpr int kExitDuplicity = 3;
constexpr int kExitAssert = 4;

struct CliError : std::runtime_error {
  int code;
  CliError(int code_, const std::string& what) : std::runtime_error(what), code(code_) {}
};

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CliError(kExitParse, "cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void append_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw CliError(kExitVerify, "cannot write " + path.string());
  f << content;
}

fs::path keys_path(const fs::path& store, const std::string& alias) {
  return store / (alias + ".keys.json");
}
fs::path kel_path(const fs::path& store, const std::string& alias) {
  return store / (alias + ".kel");
}

// The keystore holds the master seed (never printed) and the controller
// bookkeeping the KEL itself cannot carry: the hidden next-set size and
// threshold, and the chosen prefix class.
struct Keystore {
  std::array<std::uint8_t, 32> master{};
  std::size_t next_count = 1;
  SigningThreshold next_sith;
  std::string prefix_class = "self-addressing";
  std::string prefix;

  static Keystore read(const fs::path& store, const std::string& alias) {
    const fs::path path = keys_path(store, alias);
    if (!fs::exists(path)) throw CliError(kExitParse, "no such alias: " + alias);
    const OJson j = OJson::parse(read_file(path));
    Keystore k;
    const QualifiedMaterial seed = decode(j.at("seed").get<std::string>());
    std::copy(seed.raw.begin(), seed.raw.end(), k.master.begin());
    k.next_count = j.at("next_count").get<std::size_t>();
    k.next_sith = SigningThreshold::from_json(j.at("next_sith"));
    k.prefix_class = j.at("prefix_class").get<std::string>();
    k.prefix = j.at("prefix").get<std::string>();
    return k;
  }

  void write(const fs::path& store, const std::string& alias) const {
    fs::create_directories(store);
    OJson j = OJson::object();
    j["seed"] = encode(QualifiedMaterial{"A", {master.begin(), master.end()}});
    j["next_count"] = next_count;
    j["next_sith"] = next_sith.to_json();
    j["prefix_class"] = prefix_class;
    j["prefix"] = prefix;
    std::ofstream f(keys_path(store, alias), std::ios::trunc);
    if (!f) throw CliError(kExitVerify, "cannot write keystore for " + alias);
    f << j.dump(2) << "\n";
  }
};

// Replays the alias' KEL through a fresh verifier and resumes the controller.
struct LoadedAlias {
  Keystore keystore;
  KERLStore store;
  Controller controller;
};

LoadedAlias load_alias(const fs::path& store_dir, const std::string& alias) {
  Keystore keystore = Keystore::read(store_dir, alias);
  KERLStore store;
  const fs::path kel = kel_path(store_dir, alias);
  if (fs::exists(kel)) {
    const std::string stream = read_file(kel);
    for (const ApplyOutcome& out : store.import_kerl(stream)) {
      if (out.disposition != Disposition::AcceptedFirstSeen &&
          out.disposition != Disposition::SupersedingRecovery) {
        throw CliError(kExitVerify, "stored KEL no longer verifies: " + out.reason);
      }
    }
  }
  const KeyState* state = store.state(keystore.prefix);
  if (!state) throw CliError(kExitVerify, "no verified state for alias " + alias);

  Controller::Snapshot snap;
  snap.master = keystore.master;
  snap.prefix = state->prefix;
  snap.sn = state->sn;
  snap.latest_digest = state->digest;
  snap.key_index = state->first_key_index;
  snap.key_count = state->keys.size();
  snap.next_count = keystore.next_count;
  snap.sith = state->sith;
  snap.next_sith = keystore.next_sith;
  snap.config.toad = state->toad;
  snap.config.witnesses = state->witnesses;
  return LoadedAlias{keystore, std::move(store), Controller::restore(snap)};
}

std::array<std::uint8_t, 32> master_seed(const std::string& alias, bool deterministic,
                                         const std::string& seed_file) {
  if (!seed_file.empty()) {
    const std::string data = read_file(seed_file);
    std::vector<std::uint8_t> raw(data.begin(), data.end());
    if (raw.size() == 32) {
      std::array<std::uint8_t, 32> out{};
      std::copy(raw.begin(), raw.end(), out.begin());
      return out;
    }
    if (raw.size() == 16) return crypto::stretch_seed(raw);
    throw CliError(kExitParse, "seed file must hold 16 or 32 raw bytes");
  }
  if (deterministic) {
    const std::string tag = "keri-det:" + alias;
    return Blake3::hash32(
        std::span(reinterpret_cast<const std::uint8_t*>(tag.data()), tag.size()));
  }
  std::array<std::uint8_t, 32> out{};
  const auto bytes = crypto::random_bytes(32);
  std::copy(bytes.begin(), bytes.end(), out.begin());
  return out;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size() && !csv.empty()) {
    const auto comma = csv.find(',', start);
    out.push_back(csv.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int cmd_incept(const std::string& store_dir, const std::string& alias, std::size_t keys,
               const std::string& next, std::uint32_t toad, const std::string& wits,
               const std::vector<std::string>& traits, bool det, const std::string& seed_file,
               bool basic) {
  if (fs::exists(keys_path(store_dir, alias))) {
    throw CliError(kExitParse, "alias already exists: " + alias);
  }
  Keystore keystore;
  keystore.master = master_seed(alias, det, seed_file);
  keystore.next_count = next == "none" ? 0 : std::stoul(next);
  keystore.prefix_class = basic ? "basic" : "self-addressing";

  ControllerConfig cfg;
  cfg.key_count = keys;
  cfg.next_count = keystore.next_count;
  cfg.toad = toad;
  if (!wits.empty()) cfg.witnesses = split_csv(wits);
  cfg.config_traits = traits;
  cfg.prefix_class = basic ? PrefixClass::Basic : PrefixClass::SelfAddressing;
  Controller controller = Controller::incept(KeyBank(keystore.master), cfg);
  keystore.next_sith = controller.snapshot().next_sith;
  keystore.prefix = controller.prefix();

  // Verify our own work before persisting anything.
  KERLStore store;
  const ApplyOutcome out =
      store.append_first_seen(controller.inception().bytes, controller.inception().signatures);
  if (out.disposition != Disposition::AcceptedFirstSeen) {
    throw CliError(kExitVerify, "inception did not verify: " + out.reason);
  }
  keystore.write(store_dir, alias);
  const std::string framed = controller.inception().framed();
  append_file(kel_path(store_dir, alias), framed);
  std::cout << framed << "\n";
  std::cerr << "incepted " << alias << " prefix " << controller.prefix() << "\n";
  return kExitOk;
}

int cmd_rotate(const std::string& store_dir, const std::string& alias, const std::string& next,
               std::optional<std::uint32_t> toad, const std::vector<std::string>& cuts,
               const std::vector<std::string>& adds, const std::vector<std::string>& anchors) {
  LoadedAlias loaded = load_alias(store_dir, alias);
  if (loaded.controller.abandoned()) {
    throw CliError(kExitVerify, "abandoned-identifier: no further events are allowed");
  }
  Controller::RotationSpec spec;
  spec.next_count = next == "none" ? 0 : (next.empty() ? 1 : std::stoul(next));
  spec.toad = toad;
  spec.cuts = cuts;
  spec.adds = adds;
  for (const std::string& a : anchors) spec.seals.push_back(DigestSeal{a});
  const SignedEvent msg = loaded.controller.rotate(spec);

  const ApplyOutcome out = loaded.store.append_first_seen(msg.bytes, msg.signatures);
  if (out.disposition != Disposition::AcceptedFirstSeen) {
    throw CliError(kExitVerify, "rotation did not verify: " + out.reason);
  }
  Keystore keystore = loaded.keystore;
  keystore.next_count = loaded.controller.snapshot().next_count;
  keystore.next_sith = loaded.controller.snapshot().next_sith;
  keystore.write(store_dir, alias);
  const std::string framed = msg.framed();
  append_file(kel_path(store_dir, alias), framed);
  std::cout << framed << "\n";
  std::cerr << "rotated " << alias << " to sn " << msg.event.sn << "\n";
  return kExitOk;
}

int cmd_interact(const std::string& store_dir, const std::string& alias,
                 const std::vector<std::string>& anchors) {
  LoadedAlias loaded = load_alias(store_dir, alias);
  if (loaded.controller.abandoned()) {
    throw CliError(kExitVerify, "abandoned-identifier: no further events are allowed");
  }
  std::vector<Seal> seals;
  for (const std::string& a : anchors) seals.push_back(DigestSeal{a});
  const SignedEvent msg = loaded.controller.interact(std::move(seals));
  const ApplyOutcome out = loaded.store.append_first_seen(msg.bytes, msg.signatures);
  if (out.disposition != Disposition::AcceptedFirstSeen) {
    throw CliError(kExitVerify, "interaction did not verify: " + out.reason);
  }
  const std::string framed = msg.framed();
  append_file(kel_path(store_dir, alias), framed);
  std::cout << framed << "\n";
  std::cerr << "interaction at sn " << msg.event.sn << "\n";
  return kExitOk;
}

int cmd_delegate(const std::string& store_dir, const std::string& alias,
                 const std::string& child, const std::string& via, std::size_t keys,
                 const std::string& next, bool det) {
  if (fs::exists(keys_path(store_dir, child))) {
    throw CliError(kExitParse, "alias already exists: " + child);
  }
  LoadedAlias parent = load_alias(store_dir, alias);
  if (parent.controller.abandoned()) {
    throw CliError(kExitVerify, "abandoned-identifier: no further events are allowed");
  }

  Keystore child_keystore;
  child_keystore.master = master_seed(child, det, "");
  child_keystore.next_count = next == "none" ? 0 : std::stoul(next);

  ControllerConfig cfg;
  cfg.key_count = keys;
  cfg.next_count = child_keystore.next_count;
  const DelegationKind kind =
      via == "rot" ? DelegationKind::Rotation : DelegationKind::Interaction;

  std::optional<Controller> delegate;
  const DelegationPair pair =
      delegate_inception(parent.controller, KeyBank(child_keystore.master), cfg, kind, delegate);
  child_keystore.next_sith = delegate->snapshot().next_sith;
  child_keystore.prefix = delegate->prefix();

  // Verify the pair end to end before persisting: delegating event first.
  const ApplyOutcome anchored =
      parent.store.append_first_seen(pair.delegating.bytes, pair.delegating.signatures);
  if (anchored.disposition != Disposition::AcceptedFirstSeen) {
    throw CliError(kExitVerify, "delegating event did not verify: " + anchored.reason);
  }
  const ApplyOutcome delegated =
      parent.store.append_first_seen(pair.delegated.bytes, pair.delegated.signatures);
  if (delegated.disposition != Disposition::AcceptedFirstSeen) {
    throw CliError(kExitVerify, "delegated event did not verify: " + delegated.reason);
  }

  if (kind == DelegationKind::Rotation) {
    Keystore parent_keystore = parent.keystore;
    parent_keystore.next_count = parent.controller.snapshot().next_count;
    parent_keystore.next_sith = parent.controller.snapshot().next_sith;
    parent_keystore.write(store_dir, alias);
  }
  child_keystore.write(store_dir, child);
  append_file(kel_path(store_dir, alias), pair.delegating.framed());
  append_file(kel_path(store_dir, child), pair.delegated.framed());
  std::cout << pair.delegating.framed() << "\n" << pair.delegated.framed() << "\n";
  std::cerr << "delegated " << child << " prefix " << delegate->prefix() << " via "
            << (kind == DelegationKind::Rotation ? "rot" : "ixn") << "\n";
  return kExitOk;
}

int cmd_verify(const std::vector<std::string>& kel_files) {
  KERLStore store;
  bool any_rejected = false;
  for (const std::string& file : kel_files) {
    const std::string stream = read_file(file);
    std::size_t pos = 0;
    while (pos < stream.size()) {
      std::size_t consumed = 0;
      FramedMessage msg;
      try {
        msg = unframe_one(std::string_view(stream).substr(pos), consumed);
      } catch (const std::exception& e) {
        std::cerr << "parse error in " << file << ": " << e.what() << "\n";
        return kExitParse;
      }
      pos += consumed;
      const ApplyOutcome out = store.append_framed(msg);
      std::cout << file << " sn=" << out.sn << " " << disposition_name(out.disposition);
      if (!out.reason.empty()) std::cout << " " << out.reason;
      std::cout << "\n";
      if (out.disposition == Disposition::Rejected) any_rejected = true;
    }
  }

  for (const std::string& prefix : store.core().prefixes()) {
    const KeyState* state = store.state(prefix);
    std::cout << "\nprefix " << prefix << "\n";
    std::cout << "establishment subsequence:";
    for (const EventRecord& rec : store.core().trunk(prefix)) {
      if (is_establishment(rec.event.ilk)) {
        std::cout << " " << rec.event.sn << ":" << ilk_token(rec.event.ilk);
      }
    }
    std::cout << "\nfinal state: " << state->to_json().dump() << "\n";
  }

  if (!store.del().empty()) {
    std::cout << "\nduplicity detected: " << store.del().events.size()
              << " conflicting event version(s), " << store.del().receipts.size()
              << " inconsistent receipt(s)\n";
    for (const auto& entry : store.del().events) {
      std::cout << "  " << entry.prefix << " sn=" << entry.sn << " two verifiable versions ("
                << entry.original_bytes.size() << " vs " << entry.conflicting_bytes.size()
                << " bytes)\n";
    }
    return kExitDuplicity;
  }
  if (any_rejected) return kExitVerify;
  return kExitOk;
}

int cmd_simulate(const std::string& scenario_file, bool show_transcript) {
  sim::Scenario scenario;
  try {
    scenario = sim::Scenario::parse(read_file(scenario_file));
  } catch (const sim::SimError& e) {
    std::cerr << "scenario parse error: " << e.what() << "\n";
    return kExitParse;
  }
  const sim::SimResult result = sim::run(scenario);
  if (show_transcript) std::cout << result.transcript_text();
  for (const auto& [fact, value] : result.facts) {
    std::cout << "fact " << fact << " = " << value << "\n";
  }
  for (const auto& [note, value] : result.notes) {
    std::cout << "note " << note << " = " << value << "\n";
  }
  if (!result.ok()) {
    for (const auto& failure : result.failures) {
      std::cout << "assertion failed: " << failure << "\n";
    }
    return kExitAssert;
  }
  std::cout << "all assertions hold\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"key event log toolkit"};
  app.require_subcommand(1);

  std::string store_dir = "./keri_store";
  std::string alias, child, next = "1", wits, seed_file, via = "ixn", scenario_file;
  std::size_t keys = 1;
  std::uint32_t toad = 0;
  bool det = false, basic = false, transcript = false;
  std::optional<std::uint32_t> rotate_toad;
  std::vector<std::string> cuts, adds, anchors, traits, kel_files;

  auto* incept = app.add_subcommand("incept", "create an identifier and its inception event");
  incept->add_option("--store", store_dir);
  incept->add_option("--alias", alias)->required();
  incept->add_option("--keys", keys);
  incept->add_option("--next", next)->description("next key count, or 'none'");
  incept->add_option("--toad", toad);
  incept->add_option("--wits", wits)->description("comma-separated witness prefixes");
  incept->add_option("--trait", traits);
  incept->add_option("--seed-file", seed_file);
  incept->add_flag("--det", det, "deterministic seed derived from the alias");
  incept->add_flag("--basic", basic, "basic prefix embedding the public key");

  auto* rotate = app.add_subcommand("rotate", "rotate to the pre-committed next keys");
  rotate->add_option("--store", store_dir);
  rotate->add_option("--alias", alias)->required();
  rotate->add_option("--next", next);
  rotate->add_option("--toad", rotate_toad);
  rotate->add_option("--cut", cuts);
  rotate->add_option("--add", adds);
  rotate->add_option("--anchor", anchors);

  auto* interact = app.add_subcommand("interact", "anchor data seals with an interaction event");
  interact->add_option("--store", store_dir);
  interact->add_option("--alias", alias)->required();
  interact->add_option("--anchor", anchors);

  auto* delegate = app.add_subcommand("delegate", "incept a delegated identifier pair");
  delegate->add_option("--store", store_dir);
  delegate->add_option("--alias", alias)->required();
  delegate->add_option("--child", child)->required();
  delegate->add_option("--via", via)->check(CLI::IsMember({"ixn", "rot"}));
  delegate->add_option("--keys", keys);
  delegate->add_option("--next", next);
  delegate->add_flag("--det", det);

  auto* verify = app.add_subcommand("verify", "verify KEL files and print the key state");
  verify->add_option("--kel", kel_files)->required();

  auto* simulate = app.add_subcommand("simulate", "run a scenario file");
  simulate->add_option("scenario", scenario_file)->required();
  simulate->add_flag("--transcript", transcript);

  CLI11_PARSE(app, argc, argv);

  try {
    if (incept->parsed()) {
      return cmd_incept(store_dir, alias, keys, next, toad, wits, traits, det, seed_file, basic);
    }
    if (rotate->parsed()) {
      return cmd_rotate(store_dir, alias, next, rotate_toad, cuts, adds, anchors);
    }
    if (interact->parsed()) return cmd_interact(store_dir, alias, anchors);
    if (delegate->parsed()) return cmd_delegate(store_dir, alias, child, via, keys, next, det);
    if (verify->parsed()) return cmd_verify(kel_files);
    if (simulate->parsed()) return cmd_simulate(scenario_file, transcript);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const EventError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const CodecError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerify;
  }
  return kExitOk;
}
