#include <cstring>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "eigenflow/errors.hpp"
#include "eigenflow/expr.hpp"

using namespace eigenflow;

namespace {
double ev(const std::string& s, std::vector<double> x = {}, std::vector<double> u = {}) {
  return Expr::parse(s).eval(x, u);
}
}  // namespace

TEST_CASE("basic evaluation") {
  CHECK(ev("x0^2 - 1", {2}) == doctest::Approx(3.0));
  CHECK(ev("cos(x0)*exp(x0/2)", {0}) == doctest::Approx(1.0));
  CHECK(ev("u0", {}, {-1}) == doctest::Approx(-1.0));
  CHECK(ev("min(3, x0)", {5}) == doctest::Approx(3.0));
  CHECK(ev("max(3, x0)", {5}) == doctest::Approx(5.0));
  CHECK(ev("abs(-2.5)") == doctest::Approx(2.5));
  CHECK(ev("tanh(0)") == doctest::Approx(0.0));
  CHECK(ev("sqrt(x0^2 + x1^2)", {3, 4}) == doctest::Approx(5.0));
}

TEST_CASE("precedence and associativity") {
  CHECK(ev("-x0^2", {2}) == doctest::Approx(-4.0));    // ^ binds before unary minus
  CHECK(ev("2^-2") == doctest::Approx(0.25));          // signed exponent
  CHECK(ev("2^3^2") == doctest::Approx(512.0));        // right associative
  CHECK(ev("2 - 3 - 1") == doctest::Approx(-2.0));     // left associative
  CHECK(ev("6/2/3") == doctest::Approx(1.0));
  CHECK(ev("2*3 - 1") == doctest::Approx(5.0));
  CHECK(ev("2*-3") == doctest::Approx(-6.0));
  CHECK(ev("  1+ 2 *x0 ", {3}) == doctest::Approx(7.0));  // whitespace-insensitive
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK_THROWS_AS(Expr::parse(""), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("x0 +"), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("(1"), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("min(1)"), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("1 2"), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("y0"), UnknownIdentifier);
  CHECK_THROWS_AS(Expr::parse("foo(1)"), UnknownIdentifier);
  try {
    Expr::parse("1 + @");
    CHECK(false);
  } catch (const SyntaxError& e) {
    CHECK(e.offset == 4);
  }
}

TEST_CASE("evaluation is pure and deterministic") {
  Expr e = Expr::parse("exp(x0)*cos(u0) - tanh(x0*u0)/(1 + x0^2)");
  double a = e.eval(std::vector<double>{0.37}, std::vector<double>{-1.2});
  double b = e.eval(std::vector<double>{0.37}, std::vector<double>{-1.2});
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

namespace {

Expr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 12);
  std::uniform_real_distribution<double> leaf(-3.0, 3.0);
  std::uniform_int_distribution<int> coin(0, 2);
  if (depth == 0 || pick(rng) < 3) {
    int which = coin(rng);
    if (which == 0) return Expr::constant(leaf(rng));
    if (which == 1) return Expr::coord(std::uniform_int_distribution<int>(0, 2)(rng));
    return Expr::control(std::uniform_int_distribution<int>(0, 1)(rng));
  }
  switch (pick(rng)) {
    case 3: return random_tree(rng, depth - 1) + random_tree(rng, depth - 1);
    case 4: return random_tree(rng, depth - 1) - random_tree(rng, depth - 1);
    case 5: return random_tree(rng, depth - 1) * random_tree(rng, depth - 1);
    case 6: return random_tree(rng, depth - 1) / random_tree(rng, depth - 1);
    case 7: return random_tree(rng, depth - 1).pow(random_tree(rng, depth - 1));
    case 8: return -random_tree(rng, depth - 1);
    case 9: return Expr::unary(ExprOp::Sin, random_tree(rng, depth - 1));
    case 10: return Expr::unary(ExprOp::Exp, random_tree(rng, depth - 1));
    case 11:
      return Expr::binary(ExprOp::Min, random_tree(rng, depth - 1),
                          random_tree(rng, depth - 1));
    default:
      return Expr::binary(ExprOp::Max, random_tree(rng, depth - 1),
                          random_tree(rng, depth - 1));
  }
}

bool same_double(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return a == b;
}

}  // namespace

TEST_CASE("parse(print(e)) evaluates identically") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> pt(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    Expr e = random_tree(rng, 4);
    Expr back = Expr::parse(e.str());
    for (int s = 0; s < 10; ++s) {
      std::vector<double> x{pt(rng), pt(rng), pt(rng)};
      std::vector<double> u{pt(rng), pt(rng)};
      double a = e.eval(x, u);
      double b = back.eval(x, u);
      INFO("expr: ", e.str());
      CHECK(same_double(a, b));
    }
  }
}

TEST_CASE("index scanning") {
  Expr e = Expr::parse("x2 + u1*cos(x0)");
  CHECK(e.max_coord_index() == 2);
  CHECK(e.max_control_index() == 1);
  CHECK(e.depends_on_controls());
  CHECK(!Expr::parse("1 + 2").depends_on_coords());
  CHECK(Expr::parse("3.5").is_constant());
}
