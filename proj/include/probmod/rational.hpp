#pragma once

// Exact rational scalar used throughout the library. All probability values,
// LP tableaus and certificates are carried as arbitrary-precision rationals;
// there is no floating point anywhere in the decision paths.

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace probmod {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

using Vec = std::vector<Rational>;

// Canonical text form: "p/q" in lowest terms with positive denominator,
// plain "p" when the denominator is 1. This is the only serialized form;
// floating point literals are rejected on input.
inline std::string format_rational(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline bool is_rational_literal(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[i] == '-' || s[i] == '+') ++i;
  std::size_t digits = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  if (digits == 0) return false;
  if (i == s.size()) return true;
  if (s[i] != '/') return false;
  ++i;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  digits = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
  return digits > 0 && i == s.size();
}

inline std::optional<Rational> try_parse_rational(const std::string& s) {
  if (!is_rational_literal(s)) return std::nullopt;
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(Integer(s));
  Integer num(s.substr(0, slash));
  Integer den(s.substr(slash + 1));
  if (den == 0) return std::nullopt;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return Rational(num, den);  // lowest terms enforced by cpp_rational
}

inline Rational parse_rational(const std::string& s) {
  auto r = try_parse_rational(s);
  if (!r) throw std::invalid_argument("not an exact rational: '" + s + "'");
  return *r;
}

}  // namespace probmod
