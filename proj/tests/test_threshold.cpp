// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>

#include "keri/threshold.hpp"

using namespace keri;

namespace {

// Brute-force satisfaction oracle with its own exact fraction type, kept
// independent of boost::rational on purpose.
struct Frac {
  long long num = 0;
  long long den = 1;

  void normalize() {
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  Frac plus(const Frac& o) const {
    Frac r{num * o.den + o.num * den, den * o.den};
    r.normalize();
    return r;
  }
  bool at_least_one() const { return num >= den; }
};

Frac frac_of(const Weight& w) { return Frac{w.numerator(), w.denominator()}; }

bool oracle_list(const std::vector<Weight>& weights, unsigned mask) {
  Frac sum;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (mask & (1u << i)) sum = sum.plus(frac_of(weights[i]));
  }
  return sum.at_least_one();
}

bool oracle(const SigningThreshold::WeightLists& clauses, unsigned mask) {
  std::size_t base = 0;
  for (const auto& clause : clauses) {
    unsigned sub = 0;
    for (std::size_t i = 0; i < clause.size(); ++i) {
      if (mask & (1u << (base + i))) sub |= 1u << i;
    }
    if (!oracle_list(clause, sub)) return false;
    base += clause.size();
  }
  return true;
}

std::set<std::size_t> indices_of(unsigned mask, std::size_t n) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask & (1u << i)) out.insert(i);
  }
  return out;
}

SigningThreshold::WeightList weights_of(std::initializer_list<const char*> texts) {
  SigningThreshold::WeightList out;
  for (const char* t : texts) out.push_back(SigningThreshold::parse_weight(t));
  return out;
}

}  // namespace

TEST_CASE("integer threshold: 2 of 3") {
  const auto t = SigningThreshold::integer(2);
  CHECK(!t.satisfies({2}, 3));
  CHECK(t.satisfies({0, 2}, 3));
  CHECK(t.satisfies({0, 1, 2}, 3));
  CHECK_THROWS_AS(t.satisfies({3}, 3), ThresholdError);
}

TEST_CASE("equal halves: any two of three suffice") {
  const auto t = SigningThreshold::weights(weights_of({"1/2", "1/2", "1/2"}));
  CHECK(t.satisfies({0, 1}, 3));
  CHECK(t.satisfies({1, 2}, 3));
  CHECK(!t.satisfies({1}, 3));
}

TEST_CASE("unequal weights: one of the first two plus two of the last four") {
  const auto t = SigningThreshold::weights(weights_of({"1/2", "1/2", "1/4", "1/4", "1/4", "1/4"}));
  CHECK(!t.satisfies({0}, 6));
  CHECK(t.satisfies({0, 2, 3}, 6));
  CHECK(t.satisfies({0, 1}, 6));
  CHECK(t.satisfies({2, 3, 4, 5}, 6));
  CHECK(!t.satisfies({2, 3, 4}, 6));
}

TEST_CASE("list of lists: every clause must individually reach 1") {
  const SigningThreshold::WeightLists clauses = {
      weights_of({"1/2", "1/2", "1/4", "1/4", "1/4", "1/4"}),
      weights_of({"1/2", "1/2", "1/2", "1/2"}),
      weights_of({"1", "1", "1", "1"}),
  };
  const auto t = SigningThreshold::weight_lists(clauses);
  // One of the first two, two of the middle four, any one of the last four.
  CHECK(t.satisfies({0, 1, 6, 7, 10}, 14));
  // Middle clause unmet.
  CHECK(!t.satisfies({0, 1, 6, 10}, 14));
  // First clause unmet.
  CHECK(!t.satisfies({2, 3, 6, 7, 10}, 14));
}

TEST_CASE("exhaustive agreement with the brute-force oracle") {
  SUBCASE("single list, equal halves") {
    const auto weights = weights_of({"1/2", "1/2", "1/2"});
    const auto t = SigningThreshold::weights(weights);
    for (unsigned mask = 0; mask < (1u << 3); ++mask) {
      CHECK(t.satisfies(indices_of(mask, 3), 3) == oracle_list(weights, mask));
    }
  }
  SUBCASE("single list, unequal weights") {
    const auto weights = weights_of({"1/2", "1/2", "1/4", "1/4", "1/4", "1/4"});
    const auto t = SigningThreshold::weights(weights);
    for (unsigned mask = 0; mask < (1u << 6); ++mask) {
      CHECK(t.satisfies(indices_of(mask, 6), 6) == oracle_list(weights, mask));
    }
  }
  SUBCASE("list of lists over 14 offsets") {
    const SigningThreshold::WeightLists clauses = {
        weights_of({"1/2", "1/2", "1/4", "1/4", "1/4", "1/4"}),
        weights_of({"1/2", "1/2", "1/2", "1/2"}),
        weights_of({"1", "1", "1", "1"}),
    };
    const auto t = SigningThreshold::weight_lists(clauses);
    for (unsigned mask = 0; mask < (1u << 14); ++mask) {
      CHECK(t.satisfies(indices_of(mask, 14), 14) == oracle(clauses, mask));
    }
  }
}

TEST_CASE("json round trip") {
  for (const auto& t : {SigningThreshold::integer(3),
                        SigningThreshold::weights(weights_of({"1/2", "1/3", "1/6", "1"})),
                        SigningThreshold::weight_lists({weights_of({"1/2", "1/2"}),
                                                        weights_of({"1", "1/4", "3/4"})})}) {
    CHECK(SigningThreshold::from_json(t.to_json()) == t);
  }
  CHECK(SigningThreshold::integer(2).to_json().dump() == "\"2\"");
}

TEST_CASE("extract text is the depth-first concatenation") {
  CHECK(SigningThreshold::integer(2).extract_text() == "2");
  CHECK(SigningThreshold::weights(weights_of({"1/2", "1/2", "1/2"})).extract_text() ==
        "1/21/21/2");
  CHECK(SigningThreshold::weight_lists({weights_of({"1/2", "1/2"}), weights_of({"1"})})
            .extract_text() == "1/21/21");
}

TEST_CASE("validation rejects malformed thresholds") {
  CHECK_THROWS_AS(SigningThreshold::integer(0), ThresholdError);
  CHECK_THROWS_AS(SigningThreshold::weights(weights_of({"0", "1"})), ThresholdError);
  CHECK_THROWS_AS(SigningThreshold::weights(weights_of({"3/2"})), ThresholdError);
  // A clause that cannot reach 1 can never be satisfied.
  CHECK_THROWS_AS(SigningThreshold::weights(weights_of({"1/4", "1/4"})), ThresholdError);
  CHECK_THROWS_AS(SigningThreshold::from_json(OJson::parse("\"x\"")), ThresholdError);
}
