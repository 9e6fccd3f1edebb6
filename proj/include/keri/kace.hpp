// SPDX-License-Identifier: Apache-2.0
//
// The witness agreement calculus: a controller designates N witnesses, tolerates
// at most F faulty ones, and sets a tally M of receipts for accountability.
// proper:  M > F            — any agreement of F+1 contains an honest witness
// intact:  N >= 2F+1        — an honest controller is guaranteed one agreement
// immune:  ceil((N+F+1)/2) <= M <= N-F — at most one sufficient agreement can
//          ever form, even against a dishonest controller.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

namespace keri::kace {

struct AgreementParams {
  int n = 0;  // total witnesses
  int f = 0;  // assumed maximum faulty
  int m = 0;  // tally (threshold of accountable duplicity)
};

struct Classification {
  int proper_bound = 0;   // minimum M for a proper agreement: F + 1
  bool intact = false;    // N >= 2F + 1
  int immune_lower = 0;   // ceil((N + F + 1) / 2)
  int immune_upper = 0;   // N - F
  bool immune_nonempty() const { return immune_lower <= immune_upper; }
};

Classification classify(int n, int f);

/// Brute-force oracle: enumerates every pair of witness subsets of size >= m
/// whose union covers all n witnesses, and reports whether every such pair
/// intersects in at least f+1 witnesses. Independent of classify().
bool immune_split_check(int n, int f, int m);

struct AgreementRecord {
  std::string event_digest;
  std::uint64_t sn = 0;
  std::set<std::string> witnesses;  // contributors of verified receipts

  int size() const { return static_cast<int>(witnesses.size()); }
};

struct WitnessPolicy {
  std::set<std::string> witness_set;  // the event's witness set
  int threshold = 0;                  // M_V, the judging threshold
  int toad = 0;                       // M_C, the event's tally
};

struct Judgment {
  bool sufficient = false;   // contributors from the witness set reach threshold
  bool accountable = false;  // contributors from the witness set reach the tally
  std::optional<bool> jointly_confirmed;  // set when the event rotates the witness set
};

/// prev is supplied when the judged event rotates the witness set: joint
/// confirmation requires the previous set's receipts to reach its own tally
/// as well (each witness must witness the event that prunes it).
Judgment judge(const AgreementRecord& record, const WitnessPolicy& current,
               const std::optional<WitnessPolicy>& prev = std::nullopt);

}  // namespace keri::kace
