#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcx/parse.hpp"
#include "dcx/rng.hpp"

using namespace dcx;

namespace {

EvalContext ctx_of(std::initializer_list<std::pair<const char*, double>> vals) {
  EvalContext ctx;
  for (auto& [k, v] : vals) ctx.values[k] = v;
  return ctx;
}

// Random nested expressions over (t, x) for round-trip properties.
ExprPtr random_expr(SplitMix64& rng, int depth) {
  if (depth == 0) {
    switch (rng.below(4)) {
      case 0: return var("t");
      case 1: return var("x");
      case 2: return param("c1");
      default: return num(static_cast<long long>(rng.below(7)) + 1);
    }
  }
  switch (rng.below(8)) {
    case 0: return add(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 1: return mul(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 2: return div(random_expr(rng, depth - 1),
                       add(num(3), pow(random_expr(rng, depth - 1), 2)));
    case 3: return pow(add(num(2), pow(random_expr(rng, depth - 1), 2)),
                       num(static_cast<long long>(rng.below(3)) + 1));
    case 4: return fn(Kind::Sin, random_expr(rng, depth - 1));
    case 5: return fn(Kind::Exp, mul(num(1, 3), random_expr(rng, depth - 1)));
    case 6: return neg(random_expr(rng, depth - 1));
    default: return fn(Kind::Cosh, mul(num(1, 4), random_expr(rng, depth - 1)));
  }
}

}  // namespace

TEST_CASE("parse builds the expected tree shapes") {
  ExprPtr e = parse("2*t/(x^2 + eps*t^2)");
  CHECK(e->kind == Kind::Div);
  CHECK(e->kids[0]->kind == Kind::Mul);
  CHECK(e->kids[1]->kind == Kind::Add);

  ExprPtr atom = parse("t");
  CHECK(atom->kind == Kind::Var);
  CHECK(atom->name == "t");

  ExprPtr q = parse("quad(s, exp(-s^2), 0)");
  CHECK(q->kind == Kind::Quad);
  CHECK(q->name == "s");
  CHECK(q->kids[1]->kind == Kind::Number);
  // 3-argument form: the upper limit is the dummy-named symbol
  CHECK(q->kids[2]->name == "s");
}

TEST_CASE("parse reports errors with byte offsets") {
  CHECK_THROWS_AS(parse("2*"), ParseError);
  CHECK_THROWS_AS(parse("foo(1, 2)"), ParseError);       // unknown function
  CHECK_THROWS_AS(parse("sin(1, 2)"), ParseError);       // arity
  CHECK_THROWS_AS(parse("besselj(1)"), ParseError);      // arity
  CHECK_THROWS_AS(parse("2 + * 3"), ParseError);
  CHECK_THROWS_AS(parse("x/0"), ParseError);             // literal zero denominator
  try {
    parse("2 + @");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
}

TEST_CASE("format/parse round trip preserves structure") {
  std::vector<std::string> sources = {
      "2*t/(x^2 + eps*t^2)",
      "c1*exp(-a^2*t)*cos(a*x + c2)",
      "quad(s, exp(-s^2), 0)",
      "quad(s, exp(s)/(c1 - eps*s), 0, u)",
      "abs(exp(-2*t) - x^2)^(-1/2)",
      "-t - 1/2*(x + cc)^2",
      "lambertw(exp(4*t + x))",
      "2/3*x^5 - 0.25*t",
  };
  for (auto& s : sources) {
    ExprPtr e = parse(s);
    ExprPtr r = parse(format(e));
    CAPTURE(s);
    CAPTURE(format(e));
    CHECK(structurally_equal(e, r));
  }
  SplitMix64 rng(42);
  for (int i = 0; i < 200; ++i) {
    ExprPtr e = random_expr(rng, 3);
    ExprPtr r = parse(format(e));
    CAPTURE(format(e));
    CHECK(structurally_equal(e, r));
  }
}

TEST_CASE("polynomial derivative folds exactly") {
  ExprPtr e = parse("c1*x^2 + c2*x + 2*c1*t");
  ExprPtr d = differentiate(e, "x");
  ExprPtr expected = parse("2*c1*x + c2");
  CHECK(structurally_equal(d, expected));
  // heat residual of this solution constant-folds to zero
  ExprPtr ut = differentiate(e, "t");
  ExprPtr uxx = differentiate(d, "x");
  CHECK(is_number(sub(ut, uxx), Rational(0)));
}

TEST_CASE("quad node differentiates by the fundamental theorem") {
  ExprPtr q = parse("quad(s, exp(s)/(c1 - eps*s), 0, u)");
  ExprPtr d = differentiate(q, "u");
  ExprPtr expected = parse("exp(u)/(c1 - eps*u)");
  CHECK(structurally_equal(d, expected));

  // 3-argument form: derivative with respect to its own variable
  ExprPtr q2 = parse("quad(s, exp(-s^2), 0)");
  ExprPtr d2 = differentiate(q2, "s");
  CHECK(structurally_equal(d2, parse("exp(-s^2)")));

  // derivative with respect to the lower bound carries the minus sign
  ExprPtr q3 = parse("quad(s, s^2, a, u)");
  ExprPtr d3 = differentiate(q3, "a");
  CHECK(structurally_equal(d3, neg(parse("a^2"))));
}

TEST_CASE("lambertW derivative agrees with finite differences") {
  ExprPtr e = parse("lambertw(exp(4*t + x))");
  auto ctx = ctx_of({{"t", 0.2}, {"x", 0.4}});
  for (double xv : {0.1, 0.5, 1.1}) {
    ctx.values["x"] = xv;
    double defect = finite_difference_check(e, "x", ctx, 1e-5 * std::max(1.0, xv));
    CHECK(defect < 1e-6);
  }
  // closed form W/(1+W)
  ExprPtr d = differentiate(e, "x");
  ExprPtr closed = parse("lambertw(exp(4*t + x))/(1 + lambertw(exp(4*t + x)))");
  ctx.values["x"] = 0.7;
  CHECK(evaluate(d, ctx) == doctest::Approx(evaluate(closed, ctx)).epsilon(1e-12));
}

TEST_CASE("evaluate matches direct scalar arithmetic") {
  CHECK(evaluate(parse("erf(0)"), {}) == 0.0);
  CHECK(evaluate(parse("lambertw(euler)"), {}) == doctest::Approx(1.0).epsilon(1e-14));
  auto ctx = ctx_of({{"t", 0.3}, {"x", 0.5}});
  double expect = 0.6 / (std::cos(0.5) * std::cos(0.5));
  CHECK(evaluate(parse("2*t/cos(x)^2"), ctx) ==
        doctest::Approx(expect).epsilon(1e-14));
  CHECK(expect == doctest::Approx(0.77907).epsilon(1e-4));
}

TEST_CASE("domain faults") {
  CHECK_THROWS_AS(evaluate(parse("ln(-1)"), {}), DomainFault);
  CHECK_THROWS_AS(evaluate(parse("sqrt(0 - 2)"), {}), DomainFault);
  CHECK_THROWS_AS(evaluate(parse("lambertw(-1)"), {}), DomainFault);
  auto tiny = ctx_of({{"x", 1e-14}});
  CHECK_THROWS_AS(evaluate(parse("1/x"), tiny), DomainFault);
  CHECK_THROWS_AS(evaluate(parse("besselj(0, 1)"), {}), UnsupportedSpecialFunction);
  CHECK_THROWS_AS(evaluate(parse("parcylw(1, 2)"), {}), UnsupportedSpecialFunction);
  // asin tolerance clamp at the endpoint
  CHECK(evaluate(parse("asin(1.0000000000005)"), {}) ==
        doctest::Approx(std::asin(1.0)));
  CHECK_THROWS_AS(evaluate(parse("asin(1.1)"), {}), DomainFault);
}

TEST_CASE("bessel backend flag enables evaluation") {
  EvalContext ctx;
  ctx.bessel_backend = true;
  CHECK(evaluate(parse("besselj(0, 1)"), ctx) ==
        doctest::Approx(std::cyl_bessel_j(0.0, 1.0)));
}

TEST_CASE("differentiation is linear at random points") {
  ExprPtr e1 = parse("exp(x/3)*sin(t)");
  ExprPtr e2 = parse("t^2/(1 + x^2)");
  ExprPtr a = num(3, 2), b = num(-7, 5);
  ExprPtr lhs = differentiate(add(mul(a, e1), mul(b, e2)), "x");
  ExprPtr rhs = add(mul(a, differentiate(e1, "x")), mul(b, differentiate(e2, "x")));
  SplitMix64 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto ctx = ctx_of({{"t", rng.unif(0.1, 2.0)}, {"x", rng.unif(-2.0, 2.0)}});
    double l = evaluate(lhs, ctx), r = evaluate(rhs, ctx);
    CHECK(std::abs(l - r) <= 1e-12 * (1.0 + std::abs(l)));
  }
}

TEST_CASE("finite differences validate symbolic derivatives") {
  // composition exp(u) u_x with u = sin x
  ExprPtr u = parse("sin(x)");
  ExprPtr e = mul(fn(Kind::Exp, u), differentiate(u, "x"));
  auto ctx = ctx_of({{"x", 0.37}});
  CHECK(finite_difference_check(e, "x", ctx, 1e-5) < 1e-6);

  ExprPtr sq = parse("x^2");
  CHECK(finite_difference_check(sq, "x", ctx, 1e-5 * (1.0 + 0.37)) < 1e-9);

  ExprPtr bj = parse("besselj(0, x)");
  CHECK_THROWS_AS(finite_difference_check(bj, "x", ctx, 1e-5),
                  UnsupportedSpecialFunction);
}

TEST_CASE("substitution respects quad binders") {
  ExprPtr q = parse("quad(s, s*u, 0, x)");
  // substituting u inside the integrand is fine
  ExprPtr r = substitute(q, {{"u", parse("3")}});
  CHECK(structurally_equal(r, parse("quad(s, 3*s, 0, x)")));
  // substituting the dummy name touches only the bounds
  ExprPtr q2 = parse("quad(s, s^2, 0, s)");
  ExprPtr r2 = substitute(q2, {{"s", parse("x")}});
  CHECK(structurally_equal(r2, parse("quad(s, s^2, 0, x)")));
  // capture: replacement mentioning the dummy forces a rename
  ExprPtr r3 = substitute(parse("quad(s, s*u, 0, x)"), {{"u", parse("s")}});
  EvalContext ctx = ctx_of({{"x", 2.0}, {"s", 5.0}});
  // integral of y*5 over (0,2) = 10
  CHECK(evaluate(r3, ctx) == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("quad evaluation uses adaptive quadrature") {
  auto ctx = ctx_of({{"x", 1.0}});
  CHECK(evaluate(parse("quad(s, s^2, 0, x)"), ctx) ==
        doctest::Approx(1.0 / 3).epsilon(1e-12));
  ctx.values["x"] = 2.0;
  CHECK(evaluate(parse("quad(s, exp(-s^2), 0, x)"), ctx) ==
        doctest::Approx(std::sqrt(M_PI) / 2 * std::erf(2.0)).epsilon(1e-12));
  // reversed bounds flip the sign
  CHECK(evaluate(parse("quad(s, s, 2, 0)"), {}) == doctest::Approx(-2.0));
}
