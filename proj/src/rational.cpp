#include "refinery/rational.hpp"

#include <cctype>

namespace refinery {

std::string rational_to_string(const Rational& r) {
  BigInt num = r.numerator();
  BigInt den = r.denominator();  // boost keeps this positive and reduced
  if (den == 1) return num.str();

  // A finite decimal expansion exists iff den = 2^a * 5^b.
  BigInt rest = den;
  int twos = 0, fives = 0;
  while (rest % 2 == 0) { rest /= 2; ++twos; }
  while (rest % 5 == 0) { rest /= 5; ++fives; }
  if (rest != 1) return num.str() + "/" + den.str();

  int digits = twos > fives ? twos : fives;
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  BigInt scaled = num * (scale / den);
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;

  std::string body = scaled.str();
  if (static_cast<int>(body.size()) <= digits)
    body.insert(0, digits + 1 - body.size(), '0');
  body.insert(body.size() - digits, ".");
  return negative ? "-" + body : body;
}

std::string fraction_string(const Rational& r) {
  if (r.denominator() == 1) return r.numerator().str();
  return r.numerator().str() + "/" + r.denominator().str();
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// cpp_int reads a leading 0 as an octal prefix; plain decimal is meant here
BigInt decimal_digits(std::string_view s) {
  std::size_t first = s.find_first_not_of('0');
  if (first == std::string_view::npos) return BigInt(0);
  return BigInt{std::string(s.substr(first))};
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }

  Rational value;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string_view num = text.substr(0, slash);
    std::string_view den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    BigInt d = decimal_digits(den);
    if (d == 0) return std::nullopt;
    value = Rational(decimal_digits(num), d);
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (!all_digits(whole) || !all_digits(frac)) return std::nullopt;
    BigInt scale = 1;
    for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
    value = Rational(decimal_digits(whole) * scale + decimal_digits(frac), scale);
  } else {
    if (!all_digits(text)) return std::nullopt;
    value = Rational(decimal_digits(text));
  }
  return negative ? -value : value;
}

}  // namespace refinery
