// SPDX-License-Identifier: Apache-2.0

#include "keri/threshold.hpp"

#include <charconv>
#include <numeric>

namespace keri {

SigningThreshold SigningThreshold::integer(std::uint32_t k) {
  if (k < 1) throw ThresholdError("integer threshold must be >= 1");
  SigningThreshold t;
  t.value_ = k;
  return t;
}

SigningThreshold SigningThreshold::weights(WeightList list) {
  SigningThreshold t;
  t.value_ = std::move(list);
  t.validate();
  return t;
}

SigningThreshold SigningThreshold::weight_lists(WeightLists lists) {
  SigningThreshold t;
  t.value_ = std::move(lists);
  t.validate();
  return t;
}

Weight SigningThreshold::parse_weight(std::string_view text) {
  auto parse_int = [](std::string_view s) -> std::int64_t {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ThresholdError("bad weight: " + std::string(s));
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Weight(parse_int(text), 1);
  const std::int64_t num = parse_int(text.substr(0, slash));
  const std::int64_t den = parse_int(text.substr(slash + 1));
  if (den == 0) throw ThresholdError("zero denominator in weight");
  return Weight(num, den);
}

std::string SigningThreshold::weight_text(const Weight& w) {
  if (w.denominator() == 1) return std::to_string(w.numerator());
  return std::to_string(w.numerator()) + "/" + std::to_string(w.denominator());
}

SigningThreshold SigningThreshold::from_json(const OJson& j) {
  if (j.is_string()) {
    const std::string text = j.get<std::string>();
    std::uint32_t k = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ThresholdError("bad integer threshold: " + text);
    }
    return integer(k);
  }
  if (j.is_array()) {
    if (!j.empty() && j.front().is_array()) {
      WeightLists lists;
      for (const auto& clause : j) {
        WeightList list;
        for (const auto& w : clause) list.push_back(parse_weight(w.get<std::string>()));
        lists.push_back(std::move(list));
      }
      return weight_lists(std::move(lists));
    }
    WeightList list;
    for (const auto& w : j) list.push_back(parse_weight(w.get<std::string>()));
    return weights(std::move(list));
  }
  throw ThresholdError("threshold must be a string or an array");
}

OJson SigningThreshold::to_json() const {
  if (is_integer()) return OJson(std::to_string(integer_value()));
  if (const auto* list = std::get_if<WeightList>(&value_)) {
    OJson arr = OJson::array();
    for (const auto& w : *list) arr.push_back(weight_text(w));
    return arr;
  }
  OJson arr = OJson::array();
  for (const auto& clause : std::get<WeightLists>(value_)) {
    OJson inner = OJson::array();
    for (const auto& w : clause) inner.push_back(weight_text(w));
    arr.push_back(inner);
  }
  return arr;
}

std::size_t SigningThreshold::weight_count() const {
  if (is_integer()) return 0;
  if (const auto* list = std::get_if<WeightList>(&value_)) return list->size();
  std::size_t total = 0;
  for (const auto& clause : std::get<WeightLists>(value_)) total += clause.size();
  return total;
}

void SigningThreshold::validate() const {
  auto check_list = [](const WeightList& list) {
    if (list.empty()) throw ThresholdError("empty weight list");
    Weight total(0);
    for (const auto& w : list) {
      if (w <= Weight(0) || w > Weight(1)) {
        throw ThresholdError("weight out of (0, 1]: " + weight_text(w));
      }
      total += w;
    }
    if (total < Weight(1)) throw ThresholdError("weight list cannot reach 1");
  };
  if (const auto* list = std::get_if<WeightList>(&value_)) {
    check_list(*list);
  } else if (const auto* lists = std::get_if<WeightLists>(&value_)) {
    if (lists->empty()) throw ThresholdError("empty weight list of lists");
    for (const auto& clause : *lists) check_list(clause);
  }
}

bool SigningThreshold::satisfies(const std::set<std::size_t>& indices,
                                 std::size_t key_count) const {
  for (std::size_t i : indices) {
    if (i >= key_count) {
      throw ThresholdError("signer index " + std::to_string(i) + " out of range");
    }
  }
  if (is_integer()) return indices.size() >= integer_value();
  if (const auto* list = std::get_if<WeightList>(&value_)) {
    if (list->size() != key_count) {
      throw ThresholdError("weight count does not match key count");
    }
    Weight sum(0);
    for (std::size_t i : indices) sum += (*list)[i];
    return sum >= Weight(1);
  }
  const auto& lists = std::get<WeightLists>(value_);
  if (weight_count() != key_count) {
    throw ThresholdError("weight count does not match key count");
  }
  // Clause j covers the contiguous offset range following clause j-1's range.
  std::size_t base = 0;
  for (const auto& clause : lists) {
    Weight sum(0);
    for (std::size_t i : indices) {
      if (i >= base && i < base + clause.size()) sum += clause[i - base];
    }
    if (sum < Weight(1)) return false;
    base += clause.size();
  }
  return true;
}

std::string SigningThreshold::extract_text() const {
  if (is_integer()) return std::to_string(integer_value());
  std::string out;
  if (const auto* list = std::get_if<WeightList>(&value_)) {
    for (const auto& w : *list) out += weight_text(w);
    return out;
  }
  for (const auto& clause : std::get<WeightLists>(value_)) {
    for (const auto& w : clause) out += weight_text(w);
  }
  return out;
}

}  // namespace keri
