#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcx/parse.hpp"
#include "dcx/reduction.hpp"

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
id = nde07
f = 1
g = 1
h = 0
A = abs(u)^(7/10)
B = 0
domain = t in (0.3, 1.2); x in (0.4, 1.6); u in (0.2, 3)
citation = §4

[equation]
id = eqcc
f = 1
g = 1
h = 1
A = 1
B = u
reaction = -2*p*u
param = p in (0.4, 1.2)
domain = t in (0.2, 1.2); x in (0.3, 1.6)
citation = §12

[reduction]
id = t1r3
equation = heat
ansatz = phi*exp(t*x + 2*t^3/3)
omega = x + t^2
reduced = phi2 - w*phi0
domain = t in (0.2, 1.0); x in (0.3, 1.5)
citation = Table 1

[reduction]
id = t1r3-corrupt
equation = heat
ansatz = phi*exp(t*x + 2*t^3/3)
omega = x + t^2
reduced = phi2 + w*phi0
domain = t in (0.2, 1.0); x in (0.3, 1.5)
citation = Table 1

[reduction]
id = t3r4
equation = nde07
ansatz = phi
omega = x/sqrt(t)
reduced = w*phi1 + 2*(abs(phi0)^(7/10)*phi2 \
  + 7/10*abs(phi0)^(-3/10)*sign(phi0)*phi1^2)
phi_shift = 1.6
phi_scale = 0.25
domain = t in (0.3, 1.2); x in (0.4, 1.6)
citation = Table 3

[reduction]
id = t2r9
equation = heat
mode = family
ansatz = -t - (x + phi)^2/2
omega = t
reduced = phi1
domain = t in (0.2, 1.2); x in (0.3, 1.5)
citation = Table 2

[ansatz-system]
id = antireduction
equation = eqcc
kind = explicit
arg = t
functions = qa qb
d_qa = qa^2 - 2*p*qa
d_qb = qa*qb - 2*p*qb
u = qa*x + qb
domain = t in (0.3, 1.0); x in (0.4, 1.6)
citation = §12
)";

Catalog minicat() { return load_catalog_text(kMini, "mini"); }

}  // namespace

TEST_CASE("heat table row passes the two-test-function multiplier check") {
  Catalog cat = minicat();
  auto rep = check_reduction(cat, cat.reduction("t1r3"), 7);
  CHECK(rep.status == Status::Verified);
}

TEST_CASE("sign-flipped reduced ODE is caught") {
  Catalog cat = minicat();
  auto rep = check_reduction(cat, cat.reduction("t1r3-corrupt"), 7);
  CHECK(rep.status == Status::Refuted);
}

TEST_CASE("self-similar reduction with a concrete power nonlinearity") {
  Catalog cat = minicat();
  auto rep = check_reduction(cat, cat.reduction("t3r4"), 7);
  CHECK(rep.status == Status::Verified);
}

TEST_CASE("non-invertible ansatz rows run as solution families") {
  Catalog cat = minicat();
  auto rep = check_reduction(cat, cat.reduction("t2r9"), 7);
  CHECK(rep.status == Status::Verified);
}

TEST_CASE("linear-separation antireduction system passes") {
  Catalog cat = minicat();
  for (auto& fa : cat.ansatz_systems) {
    auto rep = verify_functional_ansatz(cat, fa, 7);
    CAPTURE(fa.id);
    CHECK(rep.status == Status::Verified);
  }
}

TEST_CASE("a wrong functional-ansatz system is refuted") {
  Catalog cat = minicat();
  FunctionalAnsatzRow bad = cat.ansatz_systems[0];
  bad.id = "antireduction-bad";
  bad.system["qa"] = parse("qa^2 + 2*p*qa");
  auto rep = verify_functional_ansatz(cat, bad, 7);
  CHECK(rep.status == Status::Refuted);
}

TEST_CASE("reduced-ODE particular solutions") {
  auto reports = verify_reduced_ode_solutions(7);
  REQUIRE(!reports.empty());
  for (auto& rep : reports) {
    CAPTURE(rep.entry);
    CAPTURE(rep.notes);
    CHECK(rep.status == Status::Verified);
  }
}
