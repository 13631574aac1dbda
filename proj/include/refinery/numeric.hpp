#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace refinery {

/// Exact rational used for every numeric value in specifications and in the
/// default interpreter mode. Integers are rationals with denominator 1.
using Rational = mpq_class;

/// Parses `12`, `-3`, `0.25` or `1/4`. Returns nullopt on malformed input.
std::optional<Rational> parse_rational(std::string_view text);

/// `3`, `-1/2`. Always re-parses through parse_rational.
std::string format_rational(const Rational& q);

/// Finite decimal rendering (`0.25`) when the denominator is 2^a*5^b.
std::optional<std::string> format_decimal(const Rational& q);

bool is_integer(const Rational& q);

double to_double(const Rational& q);

/// Exact value of a finite binary64.
Rational from_double(double d);

/// Best rational approximation with denominator bounded by max_den
/// (continued-fraction convergents).
Rational approximate(double d, long max_den = 1000000);

}  // namespace refinery
