#include "dcx/symmetry.hpp"

#include <cmath>

namespace dcx {

namespace {

// Total x-derivative on expressions in (t, x, u, ut, ux, uxx, uxxx).
ExprPtr total_dx(const ExprPtr& F) {
  return add({differentiate(F, "x"), mul(var("ux"), differentiate(F, "u")),
              mul(var("uxx"), differentiate(F, "ux")),
              mul(var("uxxx"), differentiate(F, "uxx")),
              mul(var("utx"), differentiate(F, "ut"))});
}

}  // namespace

Prolongation prolong2(const ExprPtr& tau, const ExprPtr& xi, const ExprPtr& eta) {
  ExprPtr ut = var("ut"), ux = var("ux"), uxx = var("uxx");
  auto d_t = [](const ExprPtr& F) { return differentiate(F, "t"); };
  auto d_x = [](const ExprPtr& F) { return differentiate(F, "x"); };
  auto d_u = [](const ExprPtr& F) { return differentiate(F, "u"); };

  // eta^t = D_t(eta - tau ut - xi ux) + tau utt + xi utx, expanded so that
  // the utt/utx contributions cancel.
  ExprPtr eta_t =
      add({d_t(eta), mul(ut, d_u(eta)),
           neg(mul(ut, add(d_t(tau), mul(ut, d_u(tau))))),
           neg(mul(ux, add(d_t(xi), mul(ut, d_u(xi)))))});
  ExprPtr eta_x =
      add({d_x(eta), mul(ux, d_u(eta)),
           neg(mul(ut, add(d_x(tau), mul(ux, d_u(tau))))),
           neg(mul(ux, add(d_x(xi), mul(ux, d_u(xi)))))});
  ExprPtr eta_xx = add({total_dx(eta_x),
                        neg(mul(var("utx"), add(d_x(tau), mul(ux, d_u(tau))))),
                        neg(mul(uxx, add(d_x(xi), mul(ux, d_u(xi)))))});
  return {eta_t, eta_x, eta_xx};
}

InvarianceChecker::InvarianceChecker(const EquationSpec& eq,
                                     const ExprPtr& A_inst,
                                     const VectorFieldSpec& field) {
  // The checker works in (t, x, ...) jet coordinates; radial equations are
  // not cataloged with symmetry rows, so eq.spatial == "x" here.
  ExprPtr ut = var("ut"), ux = var("ux"), uxx = var("uxx");
  ExprPtr gx = differentiate(eq.g, "x");
  ExprPtr Apu = differentiate(A_inst, "u");

  std::vector<ExprPtr> rhs_terms = {
      mul(eq.g, A_inst, uxx), mul(eq.g, Apu, pow(ux, 2)),
      mul(gx, A_inst, ux), mul(eq.h, eq.B, ux)};
  if (eq.reaction) rhs_terms.push_back(eq.reaction);
  ExprPtr rhs = add(rhs_terms);
  ExprPtr delta = sub(mul(eq.f, ut), rhs);
  ExprPtr manifold_ut = div(rhs, eq.f);
  ExprPtr manifold_utx = total_dx(manifold_ut);  // in (t,x,u,ux,uxx,uxxx)

  Prolongation pr = prolong2(field.tau, field.xi, field.eta);

  std::vector<ExprPtr> parts = {
      mul(field.tau, differentiate(delta, "t")),
      mul(field.xi, differentiate(delta, "x")),
      mul(field.eta, differentiate(delta, "u")),
      mul(pr.eta_t, differentiate(delta, "ut")),
      mul(pr.eta_x, differentiate(delta, "ux")),
      mul(pr.eta_xx, differentiate(delta, "uxx"))};

  std::map<std::string, ExprPtr> sub_utx = {{"utx", manifold_utx}};
  std::map<std::string, ExprPtr> sub_ut = {{"ut", manifold_ut}};
  for (auto& p : parts) p = substitute(substitute(p, sub_utx), sub_ut);

  terms_ = parts;
  defect_expr_ = add(parts);
  if (contains_free_name(defect_expr_, "ut") ||
      contains_free_name(defect_expr_, "utx"))
    throw std::logic_error("jet elimination left ut/utx behind");
}

double InvarianceChecker::defect(const JetPoint& jp) const {
  EvalContext ctx;
  ctx.values = jp.params;
  ctx.values["t"] = jp.t;
  ctx.values["x"] = jp.x;
  ctx.values["u"] = jp.u;
  ctx.values["ux"] = jp.ux;
  ctx.values["uxx"] = jp.uxx;
  ctx.values["uxxx"] = jp.uxxx;
  double v = evaluate(defect_expr_, ctx);
  double denom = 1.0;
  for (auto& t : terms_) denom += std::abs(evaluate(t, ctx));
  if (!std::isfinite(v) || !std::isfinite(denom))
    throw DomainFault("non-finite defect");
  return std::abs(v) / denom;
}

namespace {

JetPoint draw_jet(const EquationSpec& eq, SplitMix64& rng,
                  const std::map<std::string, double>& params) {
  Interval tb{0.3, 1.5}, xb{0.4, 2.0}, ub{0.2, 2.0};
  if (auto* b = eq.domain.find("t")) tb = *b;
  if (auto* b = eq.domain.find("x")) xb = *b;
  if (auto* b = eq.domain.find("u")) ub = *b;
  JetPoint jp;
  jp.params = params;
  jp.t = rng.unif(tb.lo, tb.hi);
  jp.x = rng.unif(xb.lo, xb.hi);
  jp.u = rng.unif(ub.lo, ub.hi);
  jp.ux = rng.unif(-2.0, 2.0);
  jp.uxx = rng.unif(-2.0, 2.0);
  jp.uxxx = rng.unif(-2.0, 2.0);
  return jp;
}

FieldCheck run_field(const EquationSpec& eq, const VectorFieldSpec& vf,
                     uint64_t seed, int points, double tol) {
  FieldCheck fc;
  fc.field_id = vf.id;
  std::vector<ExprPtr> instances =
      eq.forall_A ? forall_A_instances() : std::vector<ExprPtr>{eq.A};
  auto constraints = merge_constraints(eq.params, vf.params);
  double worst = 0.0;
  bool ok = true;
  for (size_t a = 0; a < instances.size(); ++a) {
    InvarianceChecker checker(eq, instances[a], vf);
    for (int d = 0; d < 2; ++d) {
      auto params =
          draw_parameters(constraints, seed, "jet/" + vf.id, d + 10 * a);
      SplitMix64 rng = substream(seed, "jetpt/" + vf.id, d + 10 * a);
      int done = 0, guard = 0;
      while (done < (points + 1) / 2 && guard++ < 50 * points) {
        JetPoint jp = draw_jet(eq, rng, params);
        double defv;
        try {
          defv = checker.defect(jp);
        } catch (const DomainFault&) {
          continue;
        }
        ++done;
        worst = std::max(worst, defv);
        if (defv >= tol) ok = false;
      }
      if (done < (points + 1) / 2) {
        ok = false;
        fc.notes = "could not draw enough admissible jet points";
      }
    }
  }
  fc.pass = ok;
  fc.max_defect = worst;
  return fc;
}

}  // namespace

void commutator(const ExprPtr& t1, const ExprPtr& x1, const ExprPtr& e1,
                const ExprPtr& t2, const ExprPtr& x2, const ExprPtr& e2,
                ExprPtr& tc, ExprPtr& xc, ExprPtr& ec) {
  auto apply = [](const ExprPtr& tau, const ExprPtr& xi, const ExprPtr& eta,
                  const ExprPtr& F) {
    return add({mul(tau, differentiate(F, "t")), mul(xi, differentiate(F, "x")),
                mul(eta, differentiate(F, "u"))});
  };
  tc = sub(apply(t1, x1, e1, t2), apply(t2, x2, e2, t1));
  xc = sub(apply(t1, x1, e1, x2), apply(t2, x2, e2, x1));
  ec = sub(apply(t1, x1, e1, e2), apply(t2, x2, e2, e1));
}

VerificationReport check_field(const Catalog& cat, const VectorFieldSpec& vf,
                               uint64_t seed, int points, double tol) {
  VerificationReport rep;
  rep.entry = vf.id;
  rep.kind = "symmetry";
  rep.seed = seed;
  const EquationSpec& eq = cat.equation(vf.equation);
  try {
    FieldCheck fc = run_field(eq, vf, seed, points, tol);
    rep.status = fc.pass ? Status::Verified : Status::Refuted;
    rep.max_rel_residual = fc.max_defect;
    rep.samples = points * 2;
    rep.notes = fc.notes;
  } catch (const std::exception& e) {
    rep.status = Status::Inconclusive;
    rep.notes = e.what();
  }
  if (!vf.notes.empty())
    rep.notes = rep.notes.empty() ? vf.notes : rep.notes + "; " + vf.notes;
  return rep;
}

namespace {

// least squares by normal equations with partial-pivot elimination
std::vector<double> solve_least_squares(const std::vector<std::vector<double>>& A,
                                        const std::vector<double>& b) {
  size_t n = A.empty() ? 0 : A[0].size();
  std::vector<std::vector<double>> M(n, std::vector<double>(n + 1, 0.0));
  for (size_t r = 0; r < A.size(); ++r) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) M[i][j] += A[r][i] * A[r][j];
      M[i][n] += A[r][i] * b[r];
    }
  }
  for (size_t i = 0; i < n; ++i) M[i][i] += 1e-14;
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
    std::swap(M[col], M[piv]);
    double p = M[col][col];
    if (std::abs(p) < 1e-300) continue;
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = M[r][col] / p;
      for (size_t j = col; j <= n; ++j) M[r][j] -= f * M[col][j];
    }
  }
  std::vector<double> x(n, 0.0);
  for (size_t i = 0; i < n; ++i)
    x[i] = std::abs(M[i][i]) > 1e-300 ? M[i][n] / M[i][i] : 0.0;
  return x;
}

}  // namespace

AlgebraCheck check_algebra(const Catalog& cat, const EquationSpec& eq,
                           const std::vector<const VectorFieldSpec*>& fields,
                           uint64_t seed, int points, double tol) {
  AlgebraCheck out;
  out.all_fields_pass = true;
  for (auto* vf : fields) {
    FieldCheck fc = run_field(eq, *vf, seed, points, tol);
    out.all_fields_pass = out.all_fields_pass && fc.pass;
    out.fields.push_back(std::move(fc));
  }

  // commutator closure against the span of the basis
  out.closure_pass = true;
  auto constraints = eq.params;
  for (auto* vf : fields)
    constraints = merge_constraints(constraints, vf->params);
  auto params = draw_parameters(constraints, seed, "algebra/" + eq.id, 0);
  SplitMix64 rng = substream(seed, "algebrapts/" + eq.id, 0);
  Interval tb{0.3, 1.5}, xb{0.4, 2.0}, ub{0.2, 2.0};
  if (auto* b = eq.domain.find("t")) tb = *b;
  if (auto* b = eq.domain.find("x")) xb = *b;
  if (auto* b = eq.domain.find("u")) ub = *b;

  const int kPts = 24;
  std::vector<std::map<std::string, double>> pts;
  for (int i = 0; i < kPts; ++i) {
    std::map<std::string, double> v = params;
    v["t"] = rng.unif(tb.lo, tb.hi);
    v["x"] = rng.unif(xb.lo, xb.hi);
    v["u"] = rng.unif(ub.lo, ub.hi);
    pts.push_back(std::move(v));
  }

  auto eval_at = [&](const ExprPtr& e, const std::map<std::string, double>& v) {
    EvalContext ctx;
    ctx.values = v;
    return evaluate(e, ctx);
  };

  for (size_t i = 0; i < fields.size(); ++i) {
    for (size_t j = i + 1; j < fields.size(); ++j) {
      ExprPtr tc, xc, ec;
      commutator(fields[i]->tau, fields[i]->xi, fields[i]->eta,
                 fields[j]->tau, fields[j]->xi, fields[j]->eta, tc, xc, ec);
      std::vector<std::vector<double>> A;
      std::vector<double> b;
      double bmax = 0.0;
      try {
        for (auto& v : pts) {
          for (const ExprPtr* comp_ptr : {&tc, &xc, &ec}) {
            std::vector<double> row;
            size_t ci = comp_ptr == &tc ? 0 : comp_ptr == &xc ? 1 : 2;
            for (auto* vf : fields) {
              const ExprPtr& basis_comp =
                  ci == 0 ? vf->tau : ci == 1 ? vf->xi : vf->eta;
              row.push_back(eval_at(basis_comp, v));
            }
            A.push_back(std::move(row));
            double rhs = eval_at(*comp_ptr, v);
            bmax = std::max(bmax, std::abs(rhs));
            b.push_back(rhs);
          }
        }
      } catch (const std::exception&) {
        out.closure_pass = false;
        continue;
      }
      std::vector<double> c = solve_least_squares(A, b);
      double ss = 0.0;
      for (size_t r = 0; r < A.size(); ++r) {
        double pred = 0.0;
        for (size_t k = 0; k < c.size(); ++k) pred += A[r][k] * c[k];
        ss += (pred - b[r]) * (pred - b[r]);
      }
      CommutatorEntry ce;
      ce.a = fields[i]->id;
      ce.b = fields[j]->id;
      ce.coefficients = c;
      ce.closure_residual = std::sqrt(ss / A.size()) / (1.0 + bmax);
      ce.pass = ce.closure_residual < tol;
      out.closure_pass = out.closure_pass && ce.pass;
      out.commutators.push_back(std::move(ce));
    }
  }
  return out;
}

}  // namespace dcx
