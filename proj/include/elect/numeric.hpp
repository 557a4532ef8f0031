#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace elect {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Tolerances used by all verification-style comparisons in float mode.
inline constexpr double kEpsRel = 1e-9;
inline constexpr double kEpsAbs = 1e-12;

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }

// Numeric policy: eps-tolerant comparisons for double, exact for Rational.
// Algorithms are templated on the weight type W and route every
// verification-style comparison through num<W>.
template <class W>
struct num;

template <>
struct num<double> {
  static constexpr bool exact = false;
  static double tol(double a, double b) {
    return std::max(kEpsAbs, kEpsRel * std::max(std::abs(a), std::abs(b)));
  }
  static bool approx_eq(double a, double b) { return std::abs(a - b) <= tol(a, b); }
  static bool approx_le(double a, double b) { return a <= b + tol(a, b); }
  static bool approx_ge(double a, double b) { return a + tol(a, b) >= b; }
  // strictly outside the tolerance band
  static bool approx_lt(double a, double b) { return a < b - tol(a, b); }
  static bool approx_gt(double a, double b) { return a > b + tol(a, b); }
  static double abs(double x) { return std::fabs(x); }
  static double from_rational(const Rational& r) { return to_double(r); }
  static constexpr const char* mode_name() { return "float64"; }
};

template <>
struct num<Rational> {
  static constexpr bool exact = true;
  static bool approx_eq(const Rational& a, const Rational& b) { return a == b; }
  static bool approx_le(const Rational& a, const Rational& b) { return a <= b; }
  static bool approx_ge(const Rational& a, const Rational& b) { return a >= b; }
  static bool approx_lt(const Rational& a, const Rational& b) { return a < b; }
  static bool approx_gt(const Rational& a, const Rational& b) { return a > b; }
  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
  static const Rational& from_rational(const Rational& r) { return r; }
  static constexpr const char* mode_name() { return "rational"; }
};

// Shortest round-trip formatting, the canonical form for all doubles we emit.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool rational_fits_double(const Rational& r) {
  double d = to_double(r);
  if (!std::isfinite(d)) return false;
  return Rational(d) == r;
}

// Writes p/q as a terminating decimal if q = 2^a 5^b with max(a,b) small,
// otherwise returns false.
inline bool rational_to_decimal(const Rational& r, std::string& out, int max_digits = 24) {
  BigInt p = boost::multiprecision::numerator(r);
  BigInt q = boost::multiprecision::denominator(r);
  bool neg = p < 0;
  if (neg) p = -p;
  int twos = 0, fives = 0;
  BigInt d = q;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) return false;
  int digits = std::max(twos, fives);
  if (digits > max_digits) return false;
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  BigInt scaled = p * (scale / q);
  std::string s = scaled.str();
  while ((int)s.size() <= digits) s.insert(s.begin(), '0');
  std::string whole = s.substr(0, s.size() - digits);
  std::string frac = digits > 0 ? s.substr(s.size() - digits) : "";
  out = (neg ? "-" : "") + whole + (frac.empty() ? "" : "." + frac);
  return true;
}

// Canonical string form of a rational: terminating decimal when possible,
// "p/q" otherwise.
inline std::string format_rational(const Rational& r) {
  std::string dec;
  if (rational_to_decimal(r, dec)) return dec;
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

// cpp_int's string constructor reads a leading zero as an octal prefix, so
// integer substrings are validated and de-zeroed by hand.
inline BigInt parse_bigint(const std::string& text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) { neg = text[i] == '-'; ++i; }
  if (i >= text.size()) throw std::invalid_argument("bad integer string: " + text);
  for (std::size_t j = i; j < text.size(); ++j)
    if (text[j] < '0' || text[j] > '9')
      throw std::invalid_argument("bad integer string: " + text);
  while (i + 1 < text.size() && text[i] == '0') ++i;
  BigInt v(text.substr(i));
  return neg ? BigInt(-v) : v;
}

// Parses "123", "-1.25" or "60/119" exactly. Throws std::invalid_argument.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty numeric string");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    BigInt p = parse_bigint(text.substr(0, slash));
    BigInt q = parse_bigint(text.substr(slash + 1));
    if (q == 0) throw std::invalid_argument("zero denominator: " + text);
    return Rational(p, q);
  }
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') { neg = text[i] == '-'; ++i; }
  std::string digits;
  int frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  for (; i < text.size(); ++i) {
    char ch = text[i];
    if (ch == '.') {
      if (seen_dot) throw std::invalid_argument("bad decimal: " + text);
      seen_dot = true;
    } else if (ch >= '0' && ch <= '9') {
      digits.push_back(ch);
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else {
      throw std::invalid_argument("bad numeric string: " + text);
    }
  }
  if (!seen_digit) throw std::invalid_argument("bad numeric string: " + text);
  BigInt p = parse_bigint(digits);
  BigInt q = 1;
  for (int j = 0; j < frac_digits; ++j) q *= 10;
  Rational r(p, q);
  return neg ? Rational(-r) : r;
}

template <class W>
W weight_from_rational(const Rational& r) {
  if constexpr (num<W>::exact) return r;
  else return to_double(r);
}

}  // namespace elect
