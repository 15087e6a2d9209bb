#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cqop/expr.hpp"

using namespace cqop;

TEST_CASE("parse builds the expected tree") {
  const Expr e = parse("r*sin(theta)");
  CHECK(e.op() == ExprOp::mul);
  CHECK(free_variables(e) == std::set<std::string>{"r", "theta"});

  const Expr p = parse("r^2 + 1/r");
  CHECK(p.op() == ExprOp::add);
  CHECK(evaluate(p, {{"r", 2.0}}) == doctest::Approx(4.5));
}

TEST_CASE("syntax errors carry the offset") {
  try {
    (void)parse("2*");
    FAIL("expected a syntax error");
  } catch (const ExprError& e) {
    CHECK(e.kind() == ExprErrorKind::syntax);
    CHECK(e.offset() == 2);
  }
  CHECK_THROWS_AS((void)parse("foo(x)"), ExprError);
  CHECK_THROWS_AS((void)parse("x^0.5"), ExprError);
  CHECK_THROWS_AS((void)parse("(x"), ExprError);
}

TEST_CASE("evaluate") {
  CHECK(evaluate(parse("r*sin(theta)"), {{"r", 2.0}, {"theta", std::numbers::pi / 2}}) == doctest::Approx(2.0));
  CHECK(evaluate(parse("r^2+1"), {{"r", 3.0}}) == 10.0);
  try {
    (void)evaluate(parse("1/r"), {{"r", 0.0}});
    FAIL("expected a domain error");
  } catch (const ExprError& e) {
    CHECK(e.kind() == ExprErrorKind::domain);
  }
  try {
    (void)evaluate(parse("x + y"), {{"x", 1.0}});
    FAIL("expected an unbound variable");
  } catch (const ExprError& e) {
    CHECK(e.kind() == ExprErrorKind::unbound_variable);
  }
  CHECK_THROWS_AS((void)evaluate(parse("log(x)"), {{"x", -1.0}}), ExprError);
  CHECK_THROWS_AS((void)evaluate(parse("sqrt(x)"), {{"x", -1.0}}), ExprError);
}

TEST_CASE("differentiate: textbook rules") {
  const Bindings at{{"r", 1.7}, {"theta", 0.4}};
  CHECK(evaluate(differentiate(parse("r^2"), "r"), at) == doctest::Approx(3.4));
  CHECK(evaluate(differentiate(parse("r*sin(theta)"), "r"), at) == doctest::Approx(std::sin(0.4)));
  CHECK(evaluate(differentiate(parse("sin(theta)^2"), "theta"), at) ==
        doctest::Approx(2 * std::sin(0.4) * std::cos(0.4)));
  CHECK(differentiate(parse("r*sin(theta)"), "phi").is_number(0.0));
}

namespace {

// Random expression over x and y whose evaluation stays away from the
// singular sets: log/sqrt wrap positive arguments and divisions use 2 + sin.
Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
  std::uniform_real_distribution<double> num(-2.0, 2.0);
  const Expr x = Expr::variable("x"), y = Expr::variable("y");
  switch (pick(rng)) {
    case 0: return x;
    case 1: return y;
    case 2: return Expr::number(std::round(num(rng) * 4) / 4);
    case 3: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 4: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 5: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 6: return random_expr(rng, depth - 1) / (Expr::number(2.0) + apply(Func::sin, random_expr(rng, depth - 1)));
    case 7:
      return pow(Expr::number(1.5) + apply(Func::cos, random_expr(rng, depth - 1)),
                 std::uniform_int_distribution<int>(-2, 3)(rng));
    case 8: return apply(Func::sin, random_expr(rng, depth - 1));
    case 9: return apply(Func::cos, random_expr(rng, depth - 1));
    case 10: return apply(Func::exp, apply(Func::sin, random_expr(rng, depth - 1)));
    default: {
      const Expr inner = Expr::number(1.25) + apply(Func::sin, random_expr(rng, depth - 1));
      return std::uniform_int_distribution<int>(0, 1)(rng) ? apply(Func::log, inner) : apply(Func::sqrt, inner);
    }
  }
}

}  // namespace

TEST_CASE("derivative agrees with central differences on random trees") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = random_expr(rng, 6);
    const double x = coord(rng), y = coord(rng);
    for (const char* var : {"x", "y"}) {
      const Expr d = differentiate(e, var);
      Bindings at{{"x", x}, {"y", y}};
      const double h = 1e-5;
      Bindings plus = at, minus = at;
      plus[var] += h;
      minus[var] -= h;
      const double fd = (evaluate(e, plus) - evaluate(e, minus)) / (2 * h);
      const double exact = evaluate(d, at);
      INFO(to_string(e), " d/d", var);
      CHECK(std::abs(exact - fd) <= 1e-6 * (1.0 + std::abs(exact)));
      ++checked;
    }
  }
  CHECK(checked == 200);
}

TEST_CASE("printing round-trips through the parser") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = random_expr(rng, 5);
    const std::string once = to_string(parse(to_string(e)));
    CHECK(to_string(parse(once)) == once);
    const Bindings at{{"x", 0.3}, {"y", -0.7}};
    CHECK(evaluate(parse(once), at) == doctest::Approx(evaluate(e, at)).epsilon(1e-13));
  }
}

TEST_CASE("substitute binds a variable") {
  const Expr e = substitute(parse("r*sin(theta)"), "r", 2.0);
  CHECK(free_variables(e) == std::set<std::string>{"theta"});
  CHECK(evaluate(e, {{"theta", std::numbers::pi / 6}}) == doctest::Approx(1.0));
}
