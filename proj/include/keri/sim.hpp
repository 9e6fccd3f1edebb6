// SPDX-License-Identifier: Apache-2.0
//
// Deterministic in-memory simulation of controllers, witnesses, and
// validators: direct mode with doubly signed receipts, indirect mode with
// round-robin dissemination, and scripted attack scenarios (dead exploit,
// signing-compromise recovery, duplicitous-controller splits). Identical
// scenarios produce byte-identical transcripts.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keri/logs.hpp"

namespace keri::sim {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Direct, RoundRobin, Gossip, AttackDead, AttackRecovery, AttackSplit };
enum class Fault { Honest, Unresponsive, Dishonest };
enum class Role { Controller, Witness, Watcher, Juror, Judge, Validator };

struct ScenarioNode {
  Role role = Role::Witness;
  std::string name;
  Fault fault = Fault::Honest;
};

struct Assertion {
  std::string fact;
  std::string op;     // <=, >=, ==, !=, <, > for numbers; == / != for notes
  std::string value;
  std::string line;   // original text, for reporting
};

struct Scenario {
  std::uint64_t seed = 0;
  Mode mode = Mode::RoundRobin;
  int n = 0, f = 0, m = 0;
  std::vector<ScenarioNode> nodes;
  std::vector<std::string> events;      // scripted ilks: icp, ixn, rot
  std::vector<std::string> pre_events;  // attack:recovery / attack:dead history
  /// Direct-mode delivery script: ("deliver", sn) and ("drop", sn) lines.
  /// Empty means deliver every event in creation order.
  std::vector<std::pair<std::string, std::uint64_t>> script;
  int exploited = 3;                    // forged interactions in attack:recovery
  int receipted = 2;                    // how many of them reach the tally
  int split = 2;                        // attack:split: witnesses on version A
  std::string compromise;               // scripted compromise point: signing|rotation
  std::vector<Assertion> asserts;

  static Scenario parse(std::string_view text);
};

struct SimResult {
  std::vector<std::string> transcript;
  std::map<std::string, std::int64_t> facts;
  std::map<std::string, std::string> notes;
  std::vector<std::string> failures;  // failed assertion lines with detail

  bool ok() const { return failures.empty(); }
  std::string transcript_text() const;
};

SimResult run(const Scenario& scenario);
SimResult run_direct(const Scenario& scenario);
SimResult run_round_robin(const Scenario& scenario);
/// Push-to-random-peer dissemination; reports the measured message count
/// (the expected growth is N log N, observed, never asserted).
SimResult run_gossip(const Scenario& scenario);
SimResult run_attack(const Scenario& scenario);

}  // namespace keri::sim
