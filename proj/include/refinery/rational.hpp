#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

namespace refinery {

// Exact rational arithmetic. Probabilities and refinement degrees are never
// represented as floating point anywhere in the workbench.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::rational<BigInt>;

/// Renders a rational as the shortest exact decimal ("0.93", "1") when the
/// reduced denominator is of the form 2^a * 5^b, and as "n/d" otherwise.
std::string rational_to_string(const Rational& r);

/// Always the reduced fraction ("101/100"), or the plain integer when the
/// denominator is 1.
std::string fraction_string(const Rational& r);

/// Accepts "7", "0.93" and "93/100". Returns nothing on malformed input or
/// a zero denominator.
std::optional<Rational> parse_rational(std::string_view text);

}  // namespace refinery
