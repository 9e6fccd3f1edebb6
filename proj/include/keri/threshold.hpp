// SPDX-License-Identifier: Apache-2.0
//
// Signing thresholds: an integer K, a list of fractional weights, or a list
// of weight lists combined with logical AND. Weight sums use exact rational
// arithmetic; floating point never enters the satisfaction check.

#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace keri {

using Weight = boost::rational<std::int64_t>;
using OJson = nlohmann::ordered_json;

class ThresholdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SigningThreshold {
 public:
  using WeightList = std::vector<Weight>;
  using WeightLists = std::vector<WeightList>;

  SigningThreshold() : value_(std::uint32_t{1}) {}
  static SigningThreshold integer(std::uint32_t k);
  static SigningThreshold weights(WeightList list);
  static SigningThreshold weight_lists(WeightLists lists);

  /// From the serialized form: "2" | ["1/2","1/2"] | [["1/2",...],...].
  static SigningThreshold from_json(const OJson& j);
  OJson to_json() const;

  /// Parses "n" or "n/d" into an exact weight.
  static Weight parse_weight(std::string_view text);
  static std::string weight_text(const Weight& w);

  bool is_integer() const { return std::holds_alternative<std::uint32_t>(value_); }
  std::uint32_t integer_value() const { return std::get<std::uint32_t>(value_); }

  /// Number of signer offsets the threshold spans (0 for integer form, which
  /// spans whatever key list it is paired with).
  std::size_t weight_count() const;

  /// True when the signer offsets meet the threshold: |indices| >= K for the
  /// integer form; exact rational sum >= 1 for a weight list; every clause
  /// satisfied on its own contiguous offset range for a list of lists.
  /// Throws ThresholdError when an index is out of range of the key list.
  bool satisfies(const std::set<std::size_t>& indices, std::size_t key_count) const;

  /// Depth-first concatenation of the threshold's element texts, as used in
  /// extracted-element serializations.
  std::string extract_text() const;

  /// Structural sanity: weights in (0,1], every clause able to reach 1.
  void validate() const;

  bool operator==(const SigningThreshold&) const = default;

 private:
  std::variant<std::uint32_t, WeightList, WeightLists> value_;
};

}  // namespace keri
