// SPDX-License-Identifier: Apache-2.0

#include "keri/kace.hpp"

#include <bit>
#include <stdexcept>
#include <vector>

namespace keri::kace {

Classification classify(int n, int f) {
  if (n < 1 || f < 0) throw std::invalid_argument("classify requires N >= 1 and F >= 0");
  Classification c;
  c.proper_bound = f + 1;
  c.intact = n >= 2 * f + 1;
  c.immune_lower = (n + f + 1 + 1) / 2;  // ceil((n + f + 1) / 2)
  c.immune_upper = n - f;
  return c;
}

bool immune_split_check(int n, int f, int m) {
  if (n < 1 || n > 20 || f < 0 || m < 1 || m > n) {
    throw std::invalid_argument("immune_split_check parameter out of range");
  }
  const std::uint32_t full = (n == 32) ? 0xFFFFFFFFu : ((1u << n) - 1u);
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    if (std::popcount(mask) >= m) candidates.push_back(mask);
  }
  for (std::uint32_t a : candidates) {
    for (std::uint32_t b : candidates) {
      if ((a | b) != full) continue;  // the pair must cover all witnesses
      if (std::popcount(a & b) < f + 1) return false;
    }
  }
  return true;
}

namespace {

int contributors_in(const AgreementRecord& record, const std::set<std::string>& witness_set) {
  int count = 0;
  for (const auto& w : record.witnesses) {
    if (witness_set.contains(w)) ++count;
  }
  return count;
}

}  // namespace

Judgment judge(const AgreementRecord& record, const WitnessPolicy& current,
               const std::optional<WitnessPolicy>& prev) {
  Judgment j;
  const int in_current = contributors_in(record, current.witness_set);
  j.sufficient = in_current >= current.threshold;
  j.accountable = in_current >= current.toad;
  if (prev && prev->witness_set != current.witness_set) {
    const int in_prev = contributors_in(record, prev->witness_set);
    j.jointly_confirmed = (in_prev >= prev->toad) && (in_current >= current.toad);
  }
  return j;
}

}  // namespace keri::kace
