#include "doctest.h"

#include <cmath>

#include "kneser/expression.hpp"

using namespace kneser;

static double ev(const std::string& s, double k) {
  return eval_expression<double>(*parse_expression(s), k);
}

TEST_CASE("arithmetic and precedence") {
  CHECK(ev("1+2*3", 0) == 7.0);
  CHECK(ev("(1+2)*3", 0) == 9.0);
  CHECK(ev("2^3^2", 0) == 512.0);  // right associative
  CHECK(ev("-2^2", 0) == -4.0);    // unary binds the whole power
  CHECK(ev("7/2", 0) == 3.5);
}

TEST_CASE("variable and functions") {
  CHECK(ev("(k+1)^2", 3) == 16.0);
  CHECK(ev("abs(sin(k))/(4*sqrt(2)*k)", 1.0) ==
        doctest::Approx(std::fabs(std::sin(1.0)) / (4.0 * std::sqrt(2.0))).epsilon(1e-15));
  CHECK(ev("max(2, min(5, k))", 10) == 5.0);
  CHECK(ev("pow(k, 3)", 2) == 8.0);
  CHECK(ev("log2(8)", 0) == 3.0);
  CHECK(ev("exp(0)", 0) == 1.0);
}

TEST_CASE("parse errors carry a position") {
  CHECK_THROWS_WITH_AS(parse_expression("1+"), doctest::Contains("position"),
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_expression("foo(3)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_expression("(1+2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_expression("1 2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_expression(""), std::invalid_argument);
}
