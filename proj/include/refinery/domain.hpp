#pragma once

#include "refinery/value.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refinery {

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite carriers used by the bounded checker and by quantifier evaluation.
struct DomainSpec {
  long int_lo = -2;
  long int_hi = 5;
  /// Explicit nat interval; when unset nat is the non-negative part of int.
  std::optional<std::pair<long, long>> nat_range;
  std::vector<Rational> float_grid = default_float_grid();
  int array_min_len = 0;
  int array_max_len = 3;
  /// Per-name carriers, also consulted for quantifier-bound names.
  std::map<std::string, std::vector<Value>> overrides;
  /// Cap on enumerated points for one obligation.
  std::uint64_t budget = 10'000'000;

  static std::vector<Rational> default_float_grid();

  /// Carrier of a type.
  /// Throws DomainError for char.
  std::vector<Value> carrier(const SpecType& t) const;

  /// Override for `name` when present (filtered to values inhabiting `t`),
  /// else carrier(t).
  std::vector<Value> carrier_for(const std::string& name, const SpecType& t) const;

  /// Applies one `domain` directive body:
  ///   `int: -2..5`, `nat: 0..4`, `float: 0, 1/2, 1`, `array: 0..3`,
  ///   `budget: 1000`, or `<name>: v1, v2, ...`.
  void apply_directive(std::string_view text);
};

}  // namespace refinery
