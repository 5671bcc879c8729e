#include <doctest.h>

#include "calibra/error.hpp"
#include "calibra/expr.hpp"

using calibra::Expression;
using calibra::ParseError;
using calibra::parse_expression;
using Eigen::VectorXd;

namespace {
VectorXd pt(std::initializer_list<double> v) {
  VectorXd x(v.size());
  int i = 0;
  for (double c : v) x(i++) = c;
  return x;
}
}  // namespace

TEST_CASE("basic evaluation") {
  auto e = parse_expression("x^2 + sin(y)", 2);
  CHECK(e.value(pt({1.0, 0.0})) == doctest::Approx(1.0));
  CHECK(e.value(pt({2.0, M_PI / 2.0})) == doctest::Approx(5.0));
}

TEST_CASE("second derivative via jet") {
  auto e = parse_expression("x^3", 1);
  auto j = e.jet(pt({2.0}));
  CHECK(j.v == doctest::Approx(8.0));
  CHECK(j.g(0) == doctest::Approx(12.0));
  CHECK(j.h(0, 0) == doctest::Approx(12.0));
}

TEST_CASE("syntax error carries position") {
  try {
    parse_expression("x +* y", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& pe) {
    CHECK(pe.line == 1);
    CHECK(pe.column == 4);
    CHECK(std::string(pe.what()).find("*") != std::string::npos);
  }
}

TEST_CASE("unknown identifiers and functions") {
  CHECK_THROWS_AS(parse_expression("foo + 1", 2), ParseError);
  CHECK_THROWS_AS(parse_expression("atan(x)", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("z", 2), ParseError);   // alias z needs dim >= 3
  CHECK_NOTHROW(parse_expression("z", 3));
  try {
    parse_expression("1 + bogus", 1);
    FAIL("expected a parse error");
  } catch (const ParseError& pe) {
    CHECK(pe.column == 5);
    CHECK(std::string(pe.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("unbalanced parentheses") {
  CHECK_THROWS_AS(parse_expression("sin(x", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("(x + 1", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("x + 1)", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("", 1), ParseError);
}

TEST_CASE("precedence and associativity") {
  CHECK(parse_expression("2*3 + 4*5", 1).value(pt({0.0})) == doctest::Approx(26.0));
  CHECK(parse_expression("2^3^2", 1).value(pt({0.0})) == doctest::Approx(512.0));
  CHECK(parse_expression("-x^2", 1).value(pt({3.0})) == doctest::Approx(-9.0));
  CHECK(parse_expression("2^-3", 1).value(pt({0.0})) == doctest::Approx(0.125));
  CHECK(parse_expression("6/2/3", 1).value(pt({0.0})) == doctest::Approx(1.0));
  CHECK(parse_expression("1 - 2 - 3", 1).value(pt({0.0})) == doctest::Approx(-4.0));
  CHECK(parse_expression("(1 - 2) - 3", 1).same_structure(parse_expression("1 - 2 - 3", 1)));
}

TEST_CASE("constants and aliases") {
  CHECK(parse_expression("sin(pi/2)", 1).value(pt({0.0})) == doctest::Approx(1.0));
  CHECK(parse_expression("log(e)", 1).value(pt({0.0})) == doctest::Approx(1.0));
  // r and theta name the first two coordinates
  auto e = parse_expression("r^2*theta", 2);
  CHECK(e.value(pt({2.0, 3.0})) == doctest::Approx(12.0));
  auto f = parse_expression("x1 + 2*x2", 2);
  CHECK(f.value(pt({1.0, 10.0})) == doctest::Approx(21.0));
}

TEST_CASE("custom variable names") {
  auto e = parse_expression("b1*cos(y1)", std::vector<std::string>{"b1", "y1"});
  CHECK(e.value(pt({2.0, 0.0})) == doctest::Approx(2.0));
  // aliases are disabled for custom lists
  CHECK_THROWS_AS(parse_expression("x + 1", std::vector<std::string>{"b1"}), ParseError);
}

TEST_CASE("pretty print round trip preserves structure") {
  const char* samples[] = {
      "x^2 + sin(y)",
      "-x^2",
      "2^3^2",
      "(x + y)*(x - y)",
      "1/(1 + x^2)",
      "x/(y*z)",
      "x - (y - z)",
      "x - y - z",
      "exp(x)*cos(y) - sqrt(x^2 + 1)",
      "x^(y + 1)",
      "(x^2)^3",
      "2^-3",
      "-(x + y)",
      "pi*r^2",
      "cosh(x)*sinh(y)/(2 + cos(x))",
  };
  for (const char* s : samples) {
    auto e = parse_expression(s, 3);
    auto round = parse_expression(e.str(), 3);
    CAPTURE(s);
    CAPTURE(e.str());
    CHECK(e.same_structure(round));
  }
}

TEST_CASE("jet matches finite differences for a parsed expression") {
  auto e = parse_expression("exp(x/3)*sin(y) + x^4/(1 + y^2)", 2);
  const VectorXd x = pt({0.7, -0.3});
  auto j = e.jet(x);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const double fd = (e.value(xp) - e.value(xm)) / (2.0 * h);
    CHECK(j.g(i) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("gradient agrees with the jet gradient") {
  const char* exprs[] = {
      "exp(x/3)*sin(y) + x^4/(1 + y^2)",
      "sqrt(1 + x^2)*log(2 + cos(y))",
      "x^0 + (-x)^3 - tan(y/4)/x",
      "cosh(x)*sinh(y) + x^(y + 2)",
      "(x + y)^pi",
  };
  const VectorXd pts[] = {pt({0.7, -0.3}), pt({1.3, 0.9}), pt({0.4, 2.1})};
  for (const char* s : exprs) {
    auto e = parse_expression(s, 2);
    for (const auto& x : pts) {
      CAPTURE(s);
      const VectorXd g = e.gradient(x);
      const VectorXd jg = e.jet(x).g;
      CHECK((g - jg).lpNorm<Eigen::Infinity>() < 1e-13 * (1.0 + jg.norm()));
    }
  }
}

TEST_CASE("number formatting round trips") {
  CHECK(calibra::format_double(2.0) == "2");
  CHECK(calibra::format_double(0.5) == "0.5");
  const double v = 1.0 / 3.0;
  CHECK(std::strtod(calibra::format_double(v).c_str(), nullptr) == v);
  const double w = M_PI * 1e-7;
  CHECK(std::strtod(calibra::format_double(w).c_str(), nullptr) == w);
}
