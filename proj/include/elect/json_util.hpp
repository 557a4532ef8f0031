#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "elect/numeric.hpp"
#include "json.hpp"

namespace elect {

// Canonical JSON encoding of exact values: integer when it fits, terminating
// decimal string, shortest round-trip double, exact "p/q" string; the first
// form that is lossless. parse(serialize(x)) == x for every rational.
inline nlohmann::json rational_to_json(const Rational& r) {
  const BigInt& den = boost::multiprecision::denominator(r);
  const BigInt& num_ = boost::multiprecision::numerator(r);
  if (den == 1 && num_ >= std::numeric_limits<std::int64_t>::min() &&
      num_ <= std::numeric_limits<std::int64_t>::max())
    return nlohmann::json(num_.template convert_to<std::int64_t>());
  std::string dec;
  if (rational_to_decimal(r, dec, 17)) return nlohmann::json(dec);
  if (rational_fits_double(r)) return nlohmann::json(to_double(r));
  return nlohmann::json(format_rational(r));
}

// Accepts integers, doubles (exact binary value) and numeric strings
// (decimal or "p/q"). Throws std::invalid_argument on anything else.
inline Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number_unsigned()) return Rational(BigInt(j.get<std::uint64_t>()));
  if (j.is_number_float()) {
    double d = j.get<double>();
    if (!std::isfinite(d)) throw std::invalid_argument("non-finite number");
    return Rational(d);
  }
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw std::invalid_argument("expected number or numeric string");
}

}  // namespace elect
