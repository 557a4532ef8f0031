#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "elect/numeric.hpp"

using namespace elect;

TEST_CASE("parse_rational accepts integers, decimals and fractions") {
  CHECK(parse_rational("0") == Rational(0));
  CHECK(parse_rational("42") == Rational(42));
  CHECK(parse_rational("-7") == Rational(-7));
  CHECK(parse_rational("1.25") == Rational(5, 4));
  CHECK(parse_rational("-0.1") == Rational(-1, 10));
  CHECK(parse_rational("60/119") == Rational(60, 119));
  CHECK(parse_rational("-3/9") == Rational(-1, 3));
  CHECK(parse_rational("+2.5") == Rational(5, 2));
  CHECK(parse_rational("007") == Rational(7));
}

TEST_CASE("parse_rational rejects junk") {
  CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1.2.3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("--1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1e3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("."), std::invalid_argument);
}

TEST_CASE("format_rational picks decimals when terminating") {
  CHECK(format_rational(Rational(5, 2)) == "2.5");
  CHECK(format_rational(Rational(1, 3)) == "1/3");
  CHECK(format_rational(Rational(60, 119)) == "60/119");
  CHECK(format_rational(Rational(-1, 8)) == "-0.125");
  CHECK(format_rational(Rational(7)) == "7");
  CHECK(format_rational(Rational(0)) == "0");
  CHECK(format_rational(Rational(1, 100)) == "0.01");
}

TEST_CASE("format round-trips through parse") {
  for (const char* s : {"5/7", "-22/7", "0.875", "123456789/1000003", "4"}) {
    Rational r = parse_rational(s);
    CHECK(parse_rational(format_rational(r)) == r);
  }
}

TEST_CASE("rational_to_decimal refuses non-terminating denominators") {
  std::string out;
  CHECK(rational_to_decimal(Rational(1, 4), out));
  CHECK(out == "0.25");
  CHECK_FALSE(rational_to_decimal(Rational(1, 3), out));
  CHECK_FALSE(rational_to_decimal(Rational(1, 7), out));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 5.0, 1e-12, 0.5042016806722689}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("float comparisons tolerate 1e-9 relative error") {
  const double one_eps = 1.0 + 0.5e-9;
  CHECK(num<double>::approx_eq(1.0, one_eps));
  CHECK(num<double>::approx_le(one_eps, 1.0));
  CHECK(num<double>::approx_ge(1.0, one_eps));
  CHECK_FALSE(num<double>::approx_lt(1.0, one_eps));
  CHECK(num<double>::approx_lt(1.0, 1.0 + 1e-6));
  CHECK(num<double>::approx_gt(1.0 + 1e-6, 1.0));
  CHECK(num<double>::approx_eq(0.0, 1e-13));
  CHECK_FALSE(num<double>::approx_eq(0.0, 1e-9));
}

TEST_CASE("rational comparisons are exact") {
  const Rational a(1, 3), b(1, 3), c = a + Rational(1, 1000000000000LL);
  CHECK(num<Rational>::approx_eq(a, b));
  CHECK_FALSE(num<Rational>::approx_eq(a, c));
  CHECK(num<Rational>::approx_lt(a, c));
  CHECK(num<Rational>::exact);
  CHECK_FALSE(num<double>::exact);
}

TEST_CASE("weight_from_rational dispatches on the weight type") {
  CHECK(weight_from_rational<Rational>(Rational(5, 7)) == Rational(5, 7));
  CHECK(weight_from_rational<double>(Rational(1, 2)) == 0.5);
}

TEST_CASE("rational_fits_double detects exact embeddings") {
  CHECK(rational_fits_double(Rational(1, 2)));
  CHECK(rational_fits_double(Rational(3)));
  CHECK_FALSE(rational_fits_double(Rational(1, 3)));
  CHECK_FALSE(rational_fits_double(Rational(60, 119)));
}
