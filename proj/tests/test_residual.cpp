#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcx/parse.hpp"
#include "dcx/residual.hpp"

using namespace dcx;

namespace {

const char* kMini = R"(
[equation]
id = heat
f = 1
g = 1
h = 0
A = 1
B = 0
domain = t in (0.2, 1.5); x in (-2, 2)
citation = §2

[equation]
id = fast
f = 1
g = 1
h = 0
A = u^(-1)
B = 0
domain = t in (0.2, 1.5); x in (0.3, 1.2); u in (0.05, 40)
citation = §8

[equation]
id = porous
f = 1
g = 1
h = 0
A = u
B = 0
domain = t in (0.5, 2); x in (0.1, 0.8); u in (0.001, 3)
citation = §7

[solution]
id = heat-additive
equation = heat
form = explicit
u = c1*x^2 + c2*x + 2*c1*t
param = c1 in (0.5, 2); c2 in (-1, 1)
domain = t in (0.2, 1.5); x in (-2, 2)
citation = §2

[solution]
id = fd-cos
equation = fast
form = explicit
u = 2*t/cos(x)^2
domain = t in (0.2, 1.5); x in (0.3, 1.2)
citation = §8

[solution]
id = fd-cos-implicit
equation = fast
form = implicit
F = u*cos(x)^2 - 2*t
domain = t in (0.2, 1.5); x in (0.3, 1.2); u in (0.05, 40)
citation = §8

[solution]
id = barenblatt
equation = porous
form = explicit
u = (-x^2 + (9*t)^(2/3))/(6*t)
domain = t in (0.5, 2); x in (0.1, 0.8)
require = (9*t)^(2/3) - x^2 - 0.05
citation = §7

[solution]
id = pme-parametric
equation = porous
form = parametric
X = (6*t + c1)*xi + c2*xi^2 + c3
U = -(6*t + c1)*xi^2 - 2*c2*xi^3
param = c1 in (0.5, 1.5); c2 in (0.2, 0.8); c3 in (-1, 1)
domain = t in (0.5, 2); xi in (-1.5, -0.5)
citation = §7
)";

Catalog minicat() { return load_catalog_text(kMini, "mini"); }

VerificationReport run(const Catalog& cat, const std::string& id) {
  VerifyOptions opts;
  return verify_entry(cat, cat.solution(id), opts);
}

}  // namespace

TEST_CASE("heat additive-separable solution verifies, residual folds to zero") {
  Catalog cat = minicat();
  const EquationSpec& heat = cat.equation("heat");
  ResidualExpr rex = residual_explicit(heat, parse("c1*x^2 + c2*x + 2*c1*t"));
  CHECK(is_number(rex.residual, Rational(0)));
  auto rep = run(cat, "heat-additive");
  CHECK(rep.status == Status::Verified);
  CHECK(rep.samples >= 96);
}

TEST_CASE("fast diffusion 2t/cos^2 x verifies, perturbation refutes") {
  Catalog cat = minicat();
  auto rep = run(cat, "fd-cos");
  CHECK(rep.status == Status::Verified);
  CHECK(rep.max_rel_residual < 1e-10);

  SolutionEntry bad = cat.solution("fd-cos");
  bad.id = "fd-cos-bad";
  bad.U = parse("2*t/cos(x)^2 + 1/10");
  VerifyOptions opts;
  auto rep2 = verify_entry(cat, bad, opts);
  CHECK(rep2.status == Status::Refuted);
}

TEST_CASE("implicit form agrees with the explicit one") {
  Catalog cat = minicat();
  auto rep = run(cat, "fd-cos-implicit");
  CHECK(rep.status == Status::Verified);
  // consistency: F = u - U(t,x) reduces to the explicit residual numerically
  const EquationSpec& heat = cat.equation("heat");
  ExprPtr U = parse("exp(t)*cosh(x)");
  ResidualExpr ex = residual_explicit(heat, U);
  ResidualExpr im = residual_implicit(heat, sub(var("u"), U));
  EvalContext ctx;
  ctx.values = {{"t", 0.7}, {"x", 0.4}};
  double a = evaluate(ex.residual, ctx);
  ctx.values["u"] = evaluate(U, ctx);
  double b = evaluate(im.residual, ctx);
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("Barenblatt interior verification") {
  Catalog cat = minicat();
  auto rep = run(cat, "barenblatt");
  CHECK(rep.status == Status::Verified);
}

TEST_CASE("parametric porous-medium pair verifies") {
  Catalog cat = minicat();
  auto rep = run(cat, "pme-parametric");
  CHECK(rep.status == Status::Verified);
  CHECK(rep.max_rel_residual < 1e-9);
}

TEST_CASE("identity parametrization matches the explicit residual") {
  Catalog cat = minicat();
  const EquationSpec& fast = cat.equation("fast");
  ExprPtr U = parse("2*t/cos(x)^2");
  ResidualExpr ex = residual_explicit(fast, U);
  ResidualExpr pa = residual_parametric(fast, var("xi"),
                                        substitute(U, {{"x", var("xi")}}));
  EvalContext ctx;
  ctx.values = {{"t", 0.9}, {"x", 0.6}, {"xi", 0.6}};
  CHECK(evaluate(ex.residual, ctx) ==
        doctest::Approx(evaluate(pa.residual, ctx)).epsilon(1e-10));
  // change of variables x = xi^2 against direct substitution
  ExprPtr X = parse("xi^2");
  ResidualExpr pb = residual_parametric(fast, X, substitute(U, {{"x", X}}));
  ctx.values["xi"] = 0.8;
  ctx.values["x"] = 0.64;
  CHECK(evaluate(ex.residual, ctx) ==
        doctest::Approx(evaluate(pb.residual, ctx)).epsilon(1e-9));
}

TEST_CASE("deliberate corruption is refuted (mutation oracle)") {
  Catalog cat = minicat();
  SolutionEntry entry = cat.solution("barenblatt");
  VerifyOptions opts;

  SolutionEntry m1 = entry;
  m1.id += "/neg";
  m1.U = mutate_negate_term(entry.U);
  CHECK(verify_entry(cat, m1, opts).status != Status::Verified);

  SolutionEntry m2 = entry;
  m2.id += "/perturb";
  m2.U = mutate_perturb_constant(entry.U);
  CHECK(verify_entry(cat, m2, opts).status != Status::Verified);

  SolutionEntry m3 = entry;
  m3.id += "/swap";
  m3.U = mutate_swap_tx(entry.U, "x");
  CHECK(verify_entry(cat, m3, opts).status != Status::Verified);
}

TEST_CASE("determinism: same seed gives identical reports") {
  Catalog cat = minicat();
  auto a = run(cat, "fd-cos");
  auto b = run(cat, "fd-cos");
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("skipped-special short-circuits") {
  Catalog cat = minicat();
  SolutionEntry entry;
  entry.id = "special";
  entry.equation = "heat";
  entry.form = SolForm::Explicit;
  entry.U = parse("parcylu(1/2, x)*exp(t)");
  entry.citation = "§2";
  VerifyOptions opts;
  CHECK(verify_entry(cat, entry, opts).status == Status::SkippedSpecial);
}
