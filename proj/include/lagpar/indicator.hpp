#pragma once

#include <lagpar/error.hpp>
#include <lagpar/rational.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lagpar {

enum class IndicatorKind { sum, ratio_of_sums };

constexpr std::string_view to_string(IndicatorKind kind) noexcept {
  return kind == IndicatorKind::sum ? "sum" : "ratio_of_sums";
}

struct ValidRange {
  Rational lo;
  Rational hi;
};

/// A named aggregation over data points. `sum` adds its numerator inputs;
/// `ratio_of_sums` divides the numerator sum by the denominator sum, e.g.
/// carbon footprint = total scope emissions / total value of investments.
struct IndicatorDef {
  std::string id;
  IndicatorKind kind = IndicatorKind::sum;
  std::vector<std::string> numerator_inputs;
  std::vector<std::string> denominator_inputs;
  std::optional<ValidRange> valid_range;
};

using ValueMap = std::map<std::string, Rational, std::less<>>;

struct RangeVerdict {
  bool ok = true;
  Rational value;
  std::optional<ValidRange> bounds;
};

inline void validate_definition(const IndicatorDef& def) {
  if (def.kind == IndicatorKind::sum && !def.denominator_inputs.empty()) {
    throw Error(Errc::invalid_definition, "sum indicator '" + def.id + "' has denominator inputs");
  }
  if (def.valid_range && def.valid_range->lo > def.valid_range->hi) {
    throw Error(Errc::invalid_definition, "indicator '" + def.id + "' has lo > hi");
  }
}

namespace detail {

inline Rational sum_inputs(const std::vector<std::string>& refs, const ValueMap& values,
                           const std::string& indicator_id) {
  Rational total;
  for (const auto& ref : refs) {
    const auto it = values.find(ref);
    if (it == values.end()) {
      throw Error(Errc::missing_input, "indicator '" + indicator_id + "' needs '" + ref + "'");
    }
    total += it->second;
  }
  return total;
}

}  // namespace detail

inline Rational compute_indicator(const IndicatorDef& def, const ValueMap& values) {
  validate_definition(def);
  const Rational numerator = detail::sum_inputs(def.numerator_inputs, values, def.id);
  if (def.kind == IndicatorKind::sum) return numerator;
  const Rational denominator = detail::sum_inputs(def.denominator_inputs, values, def.id);
  if (denominator.is_zero()) {
    throw Error(Errc::zero_denominator, "indicator '" + def.id + "' has a zero denominator sum");
  }
  return numerator / denominator;
}

/// Closed-interval check; an indicator without a range accepts everything.
inline RangeVerdict validate_range(const Rational& value, const IndicatorDef& def) {
  RangeVerdict verdict{true, value, def.valid_range};
  if (def.valid_range) verdict.ok = def.valid_range->lo <= value && value <= def.valid_range->hi;
  return verdict;
}

}  // namespace lagpar
