#pragma once

#include "refinery/numeric.hpp"
#include "refinery/spec_type.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace refinery {

struct Value;
using ArrayValue = std::vector<Value>;

/// Runtime value. Doubles only appear in binary64 interpreter runs.
struct Value {
  std::variant<bool, Rational, double, ArrayValue> data;

  Value() : data(false) {}
  Value(bool b) : data(b) {}
  Value(Rational q) : data(std::move(q)) {}
  Value(int i) : data(Rational(i)) {}
  Value(double d) : data(d) {}
  Value(ArrayValue a) : data(std::move(a)) {}

  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_rational() const { return std::holds_alternative<Rational>(data); }
  bool is_double() const { return std::holds_alternative<double>(data); }
  bool is_number() const { return is_rational() || is_double(); }
  bool is_array() const { return std::holds_alternative<ArrayValue>(data); }

  bool as_bool() const { return std::get<bool>(data); }
  const Rational& as_rational() const { return std::get<Rational>(data); }
  double as_double() const { return std::get<double>(data); }
  const ArrayValue& as_array() const { return std::get<ArrayValue>(data); }
  ArrayValue& as_array() { return std::get<ArrayValue>(data); }

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
};

/// Identifier -> value. Ordered so enumeration and printing are stable.
using Valuation = std::map<std::string, Value>;

/// `true`, `3`, `1/2`, `[1, 2]`; doubles use shortest round-trip digits.
std::string render_value(const Value& v);

/// `N = 1/2, e = 1/2`.
std::string render_valuation(const Valuation& v);

class ValueSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse of render_value for rationals, booleans and arrays.
Value parse_value(std::string_view text);

/// `N = 1/2, e = 0.5, a = [1, 2]` -> valuation.
Valuation parse_bindings(std::string_view text);

/// Whether `v` inhabits `t` (nat values are non-negative integers).
bool inhabits(const Value& v, const SpecType& t);

}  // namespace refinery
