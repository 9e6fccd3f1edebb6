// SPDX-License-Identifier: Apache-2.0

#include "keri/sim.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <random>
#include <sstream>

#include "keri/blake3.hpp"
#include "keri/kace.hpp"

namespace keri::sim {

namespace {

std::string_view fault_name(Fault f) {
  switch (f) {
    case Fault::Honest: return "honest";
    case Fault::Unresponsive: return "unresponsive";
    case Fault::Dishonest: return "dishonest";
  }
  return "?";
}

Fault fault_of(std::string_view token) {
  if (token == "honest" || token.empty()) return Fault::Honest;
  if (token == "unresponsive") return Fault::Unresponsive;
  if (token == "dishonest") return Fault::Dishonest;
  throw SimError("unknown fault mode: " + std::string(token));
}

Role role_of(std::string_view token) {
  if (token == "controller") return Role::Controller;
  if (token == "witness") return Role::Witness;
  if (token == "watcher") return Role::Watcher;
  if (token == "juror") return Role::Juror;
  if (token == "judge") return Role::Judge;
  if (token == "validator") return Role::Validator;
  throw SimError("unknown role: " + std::string(token));
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

std::int64_t parse_int(const std::string& s, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw SimError(std::string("bad ") + what + ": " + s);
  }
  return v;
}

// Deterministic per-node key material: BLAKE3(seed, name, salt).
KeyBank node_bank(std::uint64_t seed, const std::string& name, std::uint8_t salt = 0) {
  std::vector<std::uint8_t> input;
  for (int i = 0; i < 8; ++i) input.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
  input.insert(input.end(), name.begin(), name.end());
  input.push_back(salt);
  return KeyBank(Blake3::hash32(input));
}

KERLStore::Clock logical_clock(std::shared_ptr<std::uint64_t> counter) {
  return [counter]() {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "2000-01-01T00:00:00.%06u+00:00",
                  static_cast<unsigned>((*counter)++ % 1000000));
    return std::string(buf);
  };
}

}  // namespace

Scenario Scenario::parse(std::string_view text) {
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    const auto tokens = split_ws(raw);
    if (tokens.empty()) continue;
    const std::string& kw = tokens[0];

    if (kw == "seed") {
      if (tokens.size() != 2) throw SimError("seed takes one value");
      s.seed = static_cast<std::uint64_t>(parse_int(tokens[1], "seed"));
    } else if (kw == "mode") {
      if (tokens.size() != 2) throw SimError("mode takes one value");
      const std::string& m = tokens[1];
      if (m == "direct") s.mode = Mode::Direct;
      else if (m == "round-robin") s.mode = Mode::RoundRobin;
      else if (m == "gossip") s.mode = Mode::Gossip;
      else if (m == "attack:dead") s.mode = Mode::AttackDead;
      else if (m == "attack:recovery") s.mode = Mode::AttackRecovery;
      else if (m == "attack:split") s.mode = Mode::AttackSplit;
      else throw SimError("unknown mode: " + m);
    } else if (kw == "params") {
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos) throw SimError("params expects k=v: " + tokens[i]);
        const std::string key = tokens[i].substr(0, eq);
        const int value = static_cast<int>(parse_int(tokens[i].substr(eq + 1), "param"));
        if (key == "n") s.n = value;
        else if (key == "f") s.f = value;
        else if (key == "m") s.m = value;
        else throw SimError("unknown param: " + key);
      }
    } else if (kw == "controller" || kw == "witness" || kw == "validator" ||
               kw == "watcher" || kw == "juror" || kw == "judge") {
      if (tokens.size() < 2) throw SimError(kw + " needs a name");
      ScenarioNode node;
      node.role = role_of(kw);
      node.name = tokens[1];
      node.fault = tokens.size() > 2 ? fault_of(tokens[2]) : Fault::Honest;
      s.nodes.push_back(node);
    } else if (kw == "event") {
      if (tokens.size() != 2) throw SimError("event takes one ilk");
      s.events.push_back(tokens[1]);
    } else if (kw == "compromise") {
      if (tokens.size() != 2 || (tokens[1] != "signing" && tokens[1] != "rotation")) {
        throw SimError("compromise takes 'signing' or 'rotation'");
      }
      s.compromise = tokens[1];
    } else if (kw == "deliver" || kw == "drop") {
      if (tokens.size() != 2) throw SimError(kw + " takes an event sequence number");
      s.script.emplace_back(kw, static_cast<std::uint64_t>(parse_int(tokens[1], "sn")));
    } else if (kw == "pre-events") {
      s.pre_events.assign(tokens.begin() + 1, tokens.end());
    } else if (kw == "exploited") {
      s.exploited = static_cast<int>(parse_int(tokens.at(1), "exploited"));
    } else if (kw == "receipted") {
      s.receipted = static_cast<int>(parse_int(tokens.at(1), "receipted"));
    } else if (kw == "split") {
      s.split = static_cast<int>(parse_int(tokens.at(1), "split"));
    } else if (kw == "assert") {
      if (tokens.size() < 4) throw SimError("assert needs: fact op value");
      Assertion a;
      a.fact = tokens[1];
      a.op = tokens[2];
      a.value = tokens[3];
      a.line = raw;
      s.asserts.push_back(a);
    } else {
      throw SimError("unknown scenario keyword: " + kw);
    }
  }
  // Fill witnesses from params when none are listed explicitly.
  const bool has_witness = std::any_of(s.nodes.begin(), s.nodes.end(), [](const auto& n) {
    return n.role == Role::Witness;
  });
  if (!has_witness && s.n > 0 &&
      (s.mode == Mode::RoundRobin || s.mode == Mode::Gossip ||
       s.mode == Mode::AttackRecovery || s.mode == Mode::AttackSplit)) {
    for (int i = 0; i < s.n; ++i) {
      s.nodes.push_back(ScenarioNode{Role::Witness, "w" + std::to_string(i), Fault::Honest});
    }
  }
  return s;
}

std::string SimResult::transcript_text() const {
  std::string out;
  for (const auto& line : transcript) {
    out += line;
    out += '\n';
  }
  return out;
}

namespace {

struct SimWitness {
  std::string name;
  Fault fault = Fault::Honest;
  KeyBank bank{std::array<std::uint8_t, 32>{}};
  std::string prefix;
  std::unique_ptr<KERLStore> store;
  // Receipt dissemination policy: pulls are always answered; pushes stop for
  // disputed events that never became accountable.
  bool initiates_dissemination(const std::string& event_prefix, std::uint64_t sn) const {
    for (const EventRecord& rec : store->core().disputed(event_prefix)) {
      if (rec.event.sn == sn) return store->accountable(event_prefix, sn);
    }
    return true;
  }
};

struct Sim {
  const Scenario& scenario;
  SimResult result;
  std::shared_ptr<std::uint64_t> clock_counter = std::make_shared<std::uint64_t>(0);

  explicit Sim(const Scenario& s) : scenario(s) {}

  void log(const std::string& line) { result.transcript.push_back(line); }

  KERLStore make_store() {
    return KERLStore(KERLStore::Options{}, logical_clock(clock_counter));
  }

  std::vector<SimWitness> make_witnesses() {
    std::vector<SimWitness> witnesses;
    for (const auto& node : scenario.nodes) {
      if (node.role != Role::Witness) continue;
      SimWitness w;
      w.name = node.name;
      w.fault = node.fault;
      w.bank = node_bank(scenario.seed, node.name);
      w.prefix = w.bank.qualified_public(0, /*transferable=*/false);
      w.store = std::make_unique<KERLStore>(make_store());
      log("node witness " + w.name + " " + std::string(fault_name(w.fault)) + " " + w.prefix);
      witnesses.push_back(std::move(w));
    }
    return witnesses;
  }

  void check_asserts() {
    for (const Assertion& a : scenario.asserts) {
      bool pass = false;
      std::string actual;
      if (auto it = result.facts.find(a.fact); it != result.facts.end()) {
        const std::int64_t lhs = it->second;
        const std::int64_t rhs = parse_int(a.value, "assert value");
        actual = std::to_string(lhs);
        if (a.op == "<=") pass = lhs <= rhs;
        else if (a.op == ">=") pass = lhs >= rhs;
        else if (a.op == "==") pass = lhs == rhs;
        else if (a.op == "!=") pass = lhs != rhs;
        else if (a.op == "<") pass = lhs < rhs;
        else if (a.op == ">") pass = lhs > rhs;
        else throw SimError("unknown assert op: " + a.op);
      } else if (auto nit = result.notes.find(a.fact); nit != result.notes.end()) {
        actual = nit->second;
        if (a.op == "==") pass = nit->second == a.value;
        else if (a.op == "!=") pass = nit->second != a.value;
        else throw SimError("string facts support == and != only");
      } else {
        actual = "<no such fact>";
      }
      if (pass) {
        log("assert pass: " + a.line);
      } else {
        log("assert FAIL: " + a.line + " (actual " + actual + ")");
        result.failures.push_back(a.line + " (actual " + actual + ")");
      }
    }
  }
};

SignedEvent scripted_event(Controller& controller, const std::string& ilk, int salt) {
  if (ilk == "ixn") {
    std::string tag(43, 'A');
    tag[0] = static_cast<char>('B' + salt % 24);
    return controller.interact({DigestSeal{"E" + tag}});
  }
  if (ilk == "rot") return controller.rotate();
  throw SimError("unsupported scripted event ilk: " + ilk);
}

}  // namespace

// ---------------------------------------------------------------------------
// Direct mode: the validator acts as an ersatz witness, storing first-seen
// events and returning doubly signed receipts.

SimResult run_direct(const Scenario& scenario) {
  Sim sim(scenario);
  const ScenarioNode* ctl_node = nullptr;
  const ScenarioNode* val_node = nullptr;
  for (const auto& node : scenario.nodes) {
    if (node.role == Role::Controller) ctl_node = &node;
    if (node.role == Role::Validator) val_node = &node;
  }
  if (!ctl_node || !val_node) throw SimError("direct mode needs a controller and a validator");

  Controller ctl = Controller::incept(node_bank(scenario.seed, ctl_node->name));
  Controller val = Controller::incept(node_bank(scenario.seed, val_node->name));
  KERLStore ctl_store = sim.make_store();
  KERLStore val_store = sim.make_store();

  // Both parties hold their own inception; the controller also needs the
  // validator's key state to verify its receipts.
  ctl_store.append_first_seen(val.inception().bytes, val.inception().signatures);
  val_store.append_first_seen(val.inception().bytes, val.inception().signatures);

  auto deliver = [&](const SignedEvent& msg) {
    const ApplyOutcome out = val_store.append_first_seen(msg.bytes, msg.signatures);
    sim.log("deliver " + ctl_node->name + "->" + val_node->name + " sn=" +
            std::to_string(msg.event.sn) + " " + std::string(disposition_name(out.disposition)) +
            (out.reason.empty() ? "" : " " + out.reason));
    if (out.disposition == Disposition::AcceptedFirstSeen ||
        out.disposition == Disposition::SupersedingRecovery) {
      const ValidatorReceipt receipt =
          make_validator_receipt(msg.event.prefix, msg.event.sn, out.digest, msg.bytes, val);
      const std::size_t count = ctl_store.ingest_validator_receipt(receipt);
      sim.log("receipt " + val_node->name + "->" + ctl_node->name + " sn=" +
              std::to_string(msg.event.sn) + " vrct-count=" + std::to_string(count));
    }
    return out;
  };

  // Create every scripted event, then deliver per the script (or in order).
  std::vector<SignedEvent> sent;
  sent.push_back(ctl.inception());
  ctl_store.append_first_seen(ctl.inception().bytes, ctl.inception().signatures);
  for (std::size_t i = 1; i < scenario.events.size(); ++i) {
    SignedEvent msg = scripted_event(ctl, scenario.events[i], static_cast<int>(i));
    ctl_store.append_first_seen(msg.bytes, msg.signatures);
    sent.push_back(std::move(msg));
  }
  if (scenario.script.empty()) {
    for (const SignedEvent& msg : sent) deliver(msg);
  } else {
    for (const auto& [action, sn] : scenario.script) {
      if (sn >= sent.size()) throw SimError("script references unknown event sn");
      if (action == "drop") {
        sim.log("drop sn=" + std::to_string(sn));
        continue;
      }
      deliver(sent[static_cast<std::size_t>(sn)]);
    }
  }

  // Redelivery of the first event: idempotent, no second receipt signature.
  if (!sent.empty()) {
    const std::size_t before = ctl_store.vrct_count(ctl.prefix(), 0);
    const ApplyOutcome out = val_store.append_first_seen(sent[0].bytes, sent[0].signatures);
    sim.log("redeliver sn=0 " + std::string(disposition_name(out.disposition)));
    sim.result.facts["redelivery-identical"] =
        out.disposition == Disposition::DuplicateIdentical ? 1 : 0;
    sim.result.facts["vrct-0-stable"] =
        ctl_store.vrct_count(ctl.prefix(), 0) == before ? 1 : 0;
  }

  sim.result.facts["events"] = static_cast<std::int64_t>(val_store.core().trunk(ctl.prefix()).size());
  for (std::uint64_t sn = 0; sn < val_store.core().trunk(ctl.prefix()).size(); ++sn) {
    sim.result.facts["vrct-" + std::to_string(sn)] =
        static_cast<std::int64_t>(ctl_store.vrct_count(ctl.prefix(), sn));
  }
  sim.result.facts["duplicity"] = static_cast<std::int64_t>(val_store.del().events.size());
  sim.result.notes["verdict"] = val_store.del().empty() ? "clean" : "duplicity-detected";
  sim.check_asserts();
  return sim.result;
}

// ---------------------------------------------------------------------------
// Indirect mode with round-robin dissemination: the controller visits the
// witnesses in turn, each visit delivering new events plus every receipt
// collected so far, and collecting receipts back. Full dissemination of one
// event needs at most two passes: 2N acknowledged exchanges.

SimResult run_round_robin(const Scenario& scenario) {
  Sim sim(scenario);
  const ScenarioNode* ctl_node = nullptr;
  for (const auto& node : scenario.nodes) {
    if (node.role == Role::Controller) ctl_node = &node;
  }
  if (!ctl_node) throw SimError("round-robin mode needs a controller");

  std::vector<SimWitness> witnesses = sim.make_witnesses();
  if (witnesses.empty()) throw SimError("round-robin mode needs witnesses");

  ControllerConfig cfg;
  for (const auto& w : witnesses) cfg.witnesses.push_back(w.prefix);
  cfg.toad = static_cast<std::uint32_t>(scenario.m);
  Controller ctl = Controller::incept(node_bank(scenario.seed, ctl_node->name), cfg);
  KERLStore ctl_store = sim.make_store();

  std::vector<std::string> honest;
  for (const auto& w : witnesses) {
    if (w.fault == Fault::Honest) honest.push_back(w.prefix);
  }

  auto fully_receipted = [&](std::uint64_t sn) {
    for (const SimWitness& w : witnesses) {
      if (w.fault != Fault::Honest) continue;
      const auto have = w.store->couplet_witnesses(ctl.prefix(), sn);
      for (const std::string& h : honest) {
        if (std::find(have.begin(), have.end(), h) == have.end()) return false;
      }
    }
    // The controller's own KERL must be fully witnessed as well.
    const auto have = ctl_store.couplet_witnesses(ctl.prefix(), sn);
    for (const std::string& h : honest) {
      if (std::find(have.begin(), have.end(), h) == have.end()) return false;
    }
    return true;
  };

  std::int64_t max_exchanges = 0;
  std::vector<SignedEvent> script;
  for (std::size_t i = 0; i < scenario.events.size(); ++i) {
    if (i == 0) {
      if (scenario.events[0] != "icp") throw SimError("the first scripted event must be icp");
      script.push_back(ctl.inception());
    } else {
      script.push_back(scripted_event(ctl, scenario.events[i], static_cast<int>(i)));
    }
  }

  for (const SignedEvent& msg : script) {
    const ApplyOutcome own = ctl_store.append_first_seen(msg.bytes, msg.signatures);
    sim.log("controller stores sn=" + std::to_string(msg.event.sn) + " " +
            std::string(disposition_name(own.disposition)));
    std::int64_t exchanges = 0;
    const int max_passes = 3;
    bool done = false;
    for (int pass = 0; pass < max_passes && !done; ++pass) {
      for (SimWitness& w : witnesses) {
        if (w.fault == Fault::Unresponsive) {
          sim.log("visit " + w.name + " unresponsive");
          continue;
        }
        // One acknowledged exchange: push events + receipts, pull receipts.
        const std::string down = ctl_store.export_kerl(ctl.prefix());
        const auto outcomes = w.store->import_kerl(down);
        for (const auto& out : outcomes) {
          if (out.disposition == Disposition::AcceptedFirstSeen ||
              out.disposition == Disposition::SupersedingRecovery) {
            // First seen: the witness signs and stores its own receipt.
            const EventRecord* rec = nullptr;
            for (const auto& r : w.store->core().trunk(ctl.prefix())) {
              if (r.digest == out.digest) rec = &r;
            }
            if (rec) {
              const WitnessReceipt receipt = make_witness_receipt(
                  ctl.prefix(), rec->event.sn, rec->digest, rec->bytes, w.bank);
              w.store->ingest_receipt(receipt.receipt, {receipt.couplet});
              sim.log("witness " + w.name + " receipts sn=" + std::to_string(rec->event.sn));
            }
          }
        }
        // Pull: the witness answers with its full receipted log.
        ctl_store.import_kerl(w.store->export_kerl(ctl.prefix()));
        ++exchanges;
        sim.log("exchange " + std::to_string(exchanges) + " with " + w.name);
        if (fully_receipted(msg.event.sn)) {
          done = true;
          break;
        }
      }
    }
    sim.log("event sn=" + std::to_string(msg.event.sn) + " exchanges=" +
            std::to_string(exchanges) + (done ? " fully-receipted" : " plateau"));
    sim.result.facts["exchanges-ev" + std::to_string(msg.event.sn)] = exchanges;
    max_exchanges = std::max(max_exchanges, exchanges);
    sim.result.facts["agreement-" + std::to_string(msg.event.sn)] =
        static_cast<std::int64_t>(ctl_store.couplet_count(ctl.prefix(), msg.event.sn));
  }

  sim.result.facts["exchanges-per-event"] = max_exchanges;
  bool full = true;
  for (const SignedEvent& msg : script) {
    if (!fully_receipted(msg.event.sn)) full = false;
  }
  sim.result.facts["full-kerl"] = full ? 1 : 0;
  sim.result.facts["witnesses"] = static_cast<std::int64_t>(witnesses.size());
  sim.check_asserts();
  return sim.result;
}

// ---------------------------------------------------------------------------
// Attack scenarios.

namespace {

// Dead exploit: keys already exposed by a past rotation are compromised and
// used to forge an alternate version of that past event. Any validator that
// holds the original detects the forgery as duplicitous.
void attack_dead(Sim& sim) {
  const Scenario& sc = sim.scenario;
  Controller ctl = Controller::incept(node_bank(sc.seed, "ctl"));
  KERLStore validator = sim.make_store();

  std::vector<std::string> history = sc.pre_events;
  if (history.empty()) history = {"icp", "rot", "ixn"};
  if (history.front() != "icp") throw SimError("history must begin with icp");

  Controller pre_rotation_fork = ctl;  // state before any rotation
  std::vector<SignedEvent> events;
  events.push_back(ctl.inception());
  bool forked = false;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] == "rot" && !forked) {
      pre_rotation_fork = ctl;  // attacker forks at the first rotation
      forked = true;
    }
    events.push_back(scripted_event(ctl, history[i], static_cast<int>(i)));
  }
  if (!forked) throw SimError("attack:dead needs a rot in the history");

  for (const SignedEvent& msg : events) {
    const auto out = validator.append_first_seen(msg.bytes, msg.signatures);
    sim.log("propagate sn=" + std::to_string(msg.event.sn) + " " +
            std::string(disposition_name(out.disposition)));
  }
  const std::size_t trunk_before = validator.core().trunk(ctl.prefix()).size();

  // The forged alternate past rotation, signed with the compromised keys.
  sim.log("compromise " + (sc.compromise.empty() ? std::string("signing") : sc.compromise));
  Controller::RotationSpec spec;
  spec.next_count = 2;  // commits to keys under the attacker's control
  const SignedEvent forged = pre_rotation_fork.rotate(spec);
  const auto out = validator.append_first_seen(forged.bytes, forged.signatures);
  sim.log("forged alternate sn=" + std::to_string(forged.event.sn) + " " +
          std::string(disposition_name(out.disposition)));

  sim.result.facts["del"] = static_cast<std::int64_t>(validator.del().events.size());
  sim.result.facts["trunk-unchanged"] =
      validator.core().trunk(ctl.prefix()).size() == trunk_before ? 1 : 0;
  sim.result.notes["verdict"] =
      (out.disposition == Disposition::Duplicitous && !validator.del().events.empty() &&
       validator.core().trunk(ctl.prefix()).size() == trunk_before)
          ? "protected"
          : "exploited";
}

// Live signing-compromise recovery: exploited interactions extend the log,
// some of them gather enough receipts to become accountable, then the
// controller's superseding rotation recovers the trunk.
void attack_recovery(Sim& sim) {
  const Scenario& sc = sim.scenario;
  std::vector<SimWitness> witnesses = sim.make_witnesses();
  if (witnesses.empty()) throw SimError("attack:recovery needs witnesses");

  ControllerConfig cfg;
  for (const auto& w : witnesses) cfg.witnesses.push_back(w.prefix);
  cfg.toad = static_cast<std::uint32_t>(sc.m);
  Controller ctl = Controller::incept(node_bank(sc.seed, "ctl"), cfg);

  std::vector<std::string> history = sc.pre_events;
  if (history.empty()) history = {"icp", "ixn", "ixn", "ixn", "rot", "ixn", "ixn"};

  auto broadcast = [&](const SignedEvent& msg, bool with_receipts) {
    // Deliver to every witness; each witness receipts first-seen. When
    // with_receipts, receipts disseminate to every other witness.
    std::vector<std::pair<std::string, Couplet>> produced;
    for (SimWitness& w : witnesses) {
      if (w.fault == Fault::Unresponsive) continue;
      const auto out = w.store->append_first_seen(msg.bytes, msg.signatures);
      sim.log("deliver " + w.name + " sn=" + std::to_string(msg.event.sn) + " " +
              std::string(disposition_name(out.disposition)));
      if (out.disposition == Disposition::AcceptedFirstSeen ||
          out.disposition == Disposition::SupersedingRecovery) {
        const WitnessReceipt receipt =
            make_witness_receipt(msg.event.prefix, msg.event.sn, out.digest, msg.bytes, w.bank);
        w.store->ingest_receipt(receipt.receipt, {receipt.couplet});
        produced.emplace_back(w.name, receipt.couplet);
      }
    }
    if (with_receipts) {
      for (SimWitness& w : witnesses) {
        if (w.fault == Fault::Unresponsive) continue;
        for (const auto& [from, couplet] : produced) {
          const std::string digest =
              encode(digest_event(msg.bytes, "E"));
          w.store->ingest_couplets(msg.event.prefix, msg.event.sn, digest, {couplet});
        }
      }
    }
  };

  std::vector<SignedEvent> events;
  events.push_back(ctl.inception());
  for (std::size_t i = 1; i < history.size(); ++i) {
    events.push_back(scripted_event(ctl, history[i], static_cast<int>(i)));
  }
  for (const SignedEvent& msg : events) broadcast(msg, /*with_receipts=*/true);

  // Compromise: forged interactions after the last genuine event. The first
  // `receipted` of them gather full receipts (reaching the tally); the rest
  // are seen but under-receipted.
  sim.log("compromise " + (sc.compromise.empty() ? std::string("signing") : sc.compromise));
  Controller attacker = ctl;
  std::vector<SignedEvent> exploited;
  for (int i = 0; i < sc.exploited; ++i) {
    SignedEvent msg = attacker.interact({DigestSeal{"E" + std::string(43, 'Z')}});
    broadcast(msg, /*with_receipts=*/i < sc.receipted);
    exploited.push_back(std::move(msg));
  }

  // The controller detects the exploit and recovers with a rotation at the
  // first disputed location.
  const SignedEvent recovery = ctl.rotate();
  broadcast(recovery, /*with_receipts=*/true);

  // Facts from the first honest witness's log.
  SimWitness* focal = nullptr;
  for (SimWitness& w : witnesses) {
    if (w.fault == Fault::Honest) {
      focal = &w;
      break;
    }
  }
  if (!focal) throw SimError("attack:recovery needs an honest witness");

  auto join = [](const std::vector<std::uint64_t>& sns) {
    std::string out;
    for (std::size_t i = 0; i < sns.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(sns[i]);
    }
    return out;
  };
  std::vector<std::uint64_t> trunk_sns, disputed_sns, accountable_sns;
  for (const EventRecord& rec : focal->store->core().trunk(ctl.prefix())) {
    trunk_sns.push_back(rec.event.sn);
  }
  for (const EventRecord& rec : focal->store->core().disputed(ctl.prefix())) {
    disputed_sns.push_back(rec.event.sn);
    if (focal->store->accountable(ctl.prefix(), rec.event.sn)) {
      accountable_sns.push_back(rec.event.sn);
    }
  }
  sim.result.notes["trunk"] = join(trunk_sns);
  sim.result.notes["disputed"] = join(disputed_sns);
  sim.result.notes["accountable"] = join(accountable_sns);

  // Convergence: every honest witness holds the recovered trunk.
  bool converged = true;
  for (const SimWitness& w : witnesses) {
    if (w.fault != Fault::Honest) continue;
    if (w.store->state(ctl.prefix())->digest != focal->store->state(ctl.prefix())->digest) {
      converged = false;
    }
  }
  sim.result.facts["converged"] = converged ? 1 : 0;

  // Receipt die-off: no witness initiates dissemination for disputed events
  // below the tally, while accountable disputed events flow normally.
  bool die_off = true;
  for (const SimWitness& w : witnesses) {
    if (w.fault != Fault::Honest) continue;
    for (const std::uint64_t sn : disputed_sns) {
      const bool accountable = focal->store->accountable(ctl.prefix(), sn);
      if (w.initiates_dissemination(ctl.prefix(), sn) != accountable) die_off = false;
    }
  }
  sim.result.facts["die-off"] = die_off ? 1 : 0;
  sim.result.notes["verdict"] =
      (trunk_sns.size() == history.size() + 1 && converged) ? "recovered" : "not-recovered";
  sim.check_asserts();
}

// Duplicitous controller: two versions of one event, each delivered first to
// a disjoint subset of witnesses. With an immune tally at most one version
// can ever gather sufficient agreement.
void attack_split(Sim& sim) {
  const Scenario& sc = sim.scenario;
  std::vector<SimWitness> witnesses = sim.make_witnesses();
  if (witnesses.empty()) throw SimError("attack:split needs witnesses");

  ControllerConfig cfg;
  for (const auto& w : witnesses) cfg.witnesses.push_back(w.prefix);
  cfg.toad = static_cast<std::uint32_t>(sc.m);
  Controller ctl = Controller::incept(node_bank(sc.seed, "ctl"), cfg);

  for (SimWitness& w : witnesses) {
    w.store->append_first_seen(ctl.inception().bytes, ctl.inception().signatures);
    const WitnessReceipt receipt = make_witness_receipt(
        ctl.prefix(), 0, encode(digest_event(ctl.inception().bytes, "E")),
        ctl.inception().bytes, w.bank);
    w.store->ingest_receipt(receipt.receipt, {receipt.couplet});
  }

  Controller forked = ctl;
  const SignedEvent version_a = ctl.interact({DigestSeal{"E" + std::string(43, 'P')}});
  const SignedEvent version_b = forked.interact({DigestSeal{"E" + std::string(43, 'Q')}});

  const int k = std::min<int>(sc.split, static_cast<int>(witnesses.size()));
  std::vector<std::pair<const SignedEvent*, Couplet>> receipts;
  for (std::size_t i = 0; i < witnesses.size(); ++i) {
    SimWitness& w = witnesses[i];
    const SignedEvent& version = static_cast<int>(i) < k ? version_a : version_b;
    const auto out = w.store->append_first_seen(version.bytes, version.signatures);
    sim.log("deliver " + w.name + " version=" + (static_cast<int>(i) < k ? "A" : "B") + " " +
            std::string(disposition_name(out.disposition)));
    if (out.disposition == Disposition::AcceptedFirstSeen) {
      const WitnessReceipt receipt =
          make_witness_receipt(ctl.prefix(), 1, out.digest, version.bytes, w.bank);
      w.store->ingest_receipt(receipt.receipt, {receipt.couplet});
      receipts.emplace_back(&version, receipt.couplet);
    }
  }
  // Cross dissemination: every witness pushes its receipt to every other.
  // Honest witnesses never countersign the other version; inconsistent
  // receipts land in their DELs.
  for (SimWitness& w : witnesses) {
    for (const auto& [version, couplet] : receipts) {
      const std::string digest = encode(digest_event(version->bytes, "E"));
      w.store->ingest_couplets(ctl.prefix(), 1, digest, {couplet});
    }
  }

  // The other version delivered later is detected as duplicitous.
  std::int64_t duplicity = 0;
  for (SimWitness& w : witnesses) {
    if (!w.store->del().events.empty() || !w.store->del().receipts.empty()) ++duplicity;
  }

  std::int64_t size_a = 0, size_b = 0;
  const std::string digest_a = encode(digest_event(version_a.bytes, "E"));
  for (const SimWitness& w : witnesses) {
    const auto& trunk = w.store->core().trunk(ctl.prefix());
    if (trunk.size() < 2) continue;
    const std::size_t count = w.store->couplet_count(ctl.prefix(), 1);
    if (trunk[1].digest == digest_a) {
      size_a = std::max<std::int64_t>(size_a, static_cast<std::int64_t>(count));
    } else {
      size_b = std::max<std::int64_t>(size_b, static_cast<std::int64_t>(count));
    }
  }
  sim.result.facts["agreement-a"] = size_a;
  sim.result.facts["agreement-b"] = size_b;
  const std::int64_t sufficient =
      (size_a >= sc.m ? 1 : 0) + (size_b >= sc.m ? 1 : 0);
  sim.result.facts["sufficient-count"] = sufficient;
  sim.result.facts["duplicity-observers"] = duplicity;
  sim.result.facts["immune-predicts-safe"] =
      kace::immune_split_check(sc.n, sc.f, sc.m) ? 1 : 0;
  sim.result.notes["verdict"] = sufficient <= 1 ? "at-most-one-sufficient" : "split";
  sim.check_asserts();
}

}  // namespace

// ---------------------------------------------------------------------------
// Gossip dissemination: the controller seeds each event at one witness, then
// every round each informed witness pushes its receipted copy to a uniformly
// random peer. Messages grow like N log N; the count is measured, never
// asserted.

SimResult run_gossip(const Scenario& scenario) {
  Sim sim(scenario);
  const ScenarioNode* ctl_node = nullptr;
  for (const auto& node : scenario.nodes) {
    if (node.role == Role::Controller) ctl_node = &node;
  }
  if (!ctl_node) throw SimError("gossip mode needs a controller");
  std::vector<SimWitness> witnesses = sim.make_witnesses();
  if (witnesses.size() < 2) throw SimError("gossip mode needs at least two witnesses");

  ControllerConfig cfg;
  for (const auto& w : witnesses) cfg.witnesses.push_back(w.prefix);
  cfg.toad = static_cast<std::uint32_t>(scenario.m);
  Controller ctl = Controller::incept(node_bank(scenario.seed, ctl_node->name), cfg);
  KERLStore ctl_store = sim.make_store();

  std::vector<SignedEvent> script;
  for (std::size_t i = 0; i < scenario.events.size(); ++i) {
    if (i == 0) {
      if (scenario.events[0] != "icp") throw SimError("the first scripted event must be icp");
      script.push_back(ctl.inception());
    } else {
      script.push_back(scripted_event(ctl, scenario.events[i], static_cast<int>(i)));
    }
  }

  std::mt19937_64 rng(scenario.seed * 2654435761u + 17);
  std::int64_t total_messages = 0;
  std::int64_t total_rounds = 0;

  auto everyone_has_all = [&](std::uint64_t sn) {
    for (const SimWitness& w : witnesses) {
      if (w.fault != Fault::Honest) continue;
      std::size_t have = w.store->couplet_count(ctl.prefix(), sn);
      std::size_t honest = 0;
      for (const SimWitness& o : witnesses) {
        if (o.fault == Fault::Honest) ++honest;
      }
      if (have < honest) return false;
    }
    return true;
  };

  for (const SignedEvent& msg : script) {
    ctl_store.append_first_seen(msg.bytes, msg.signatures);
    // Seed every witness with the event itself (promulgation), receipts then
    // spread by gossip alone.
    for (SimWitness& w : witnesses) {
      if (w.fault == Fault::Unresponsive) continue;
      const auto out = w.store->append_first_seen(msg.bytes, msg.signatures);
      ++total_messages;
      if (out.disposition == Disposition::AcceptedFirstSeen) {
        const WitnessReceipt receipt =
            make_witness_receipt(ctl.prefix(), msg.event.sn, out.digest, msg.bytes, w.bank);
        w.store->ingest_receipt(receipt.receipt, {receipt.couplet});
      }
    }
    int round = 0;
    const int max_rounds = 64;
    while (!everyone_has_all(msg.event.sn) && round < max_rounds) {
      ++round;
      for (std::size_t i = 0; i < witnesses.size(); ++i) {
        SimWitness& from = witnesses[i];
        if (from.fault == Fault::Unresponsive) continue;
        std::size_t j = rng() % (witnesses.size() - 1);
        if (j >= i) ++j;
        SimWitness& to = witnesses[j];
        if (to.fault == Fault::Unresponsive) continue;
        to.store->import_kerl(from.store->export_kerl(ctl.prefix()));
        ++total_messages;
      }
      sim.log("gossip round " + std::to_string(round) + " for sn=" +
              std::to_string(msg.event.sn));
    }
    total_rounds += round;
    // The controller pulls the fully receipted log from the first witness.
    ctl_store.import_kerl(witnesses.front().store->export_kerl(ctl.prefix()));
    sim.result.facts["agreement-" + std::to_string(msg.event.sn)] =
        static_cast<std::int64_t>(ctl_store.couplet_count(ctl.prefix(), msg.event.sn));
  }

  sim.result.facts["gossip-messages"] = total_messages;
  sim.result.facts["gossip-rounds"] = total_rounds;
  sim.result.facts["witnesses"] = static_cast<std::int64_t>(witnesses.size());
  bool full = true;
  for (const SignedEvent& msg : script) {
    if (!everyone_has_all(msg.event.sn)) full = false;
  }
  sim.result.facts["full-kerl"] = full ? 1 : 0;
  sim.check_asserts();
  return sim.result;
}

SimResult run_attack(const Scenario& scenario) {
  Sim sim(scenario);
  switch (scenario.mode) {
    case Mode::AttackDead:
      attack_dead(sim);
      sim.check_asserts();
      return sim.result;
    case Mode::AttackRecovery:
      attack_recovery(sim);
      return sim.result;
    case Mode::AttackSplit:
      attack_split(sim);
      return sim.result;
    default:
      throw SimError("not an attack scenario");
  }
}

SimResult run(const Scenario& scenario) {
  switch (scenario.mode) {
    case Mode::Direct: return run_direct(scenario);
    case Mode::RoundRobin: return run_round_robin(scenario);
    case Mode::Gossip: return run_gossip(scenario);
    default: return run_attack(scenario);
  }
}

}  // namespace keri::sim
