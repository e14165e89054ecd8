#include "dcx/residual.hpp"

#include <cmath>

namespace dcx {

namespace {

// terms of f u_t - g_x A u_x - g A' u_x^2 - g A u_xx - h B u_x - reaction,
// with the jet expressions supplied by the caller.
ResidualExpr assemble(const EquationSpec& eq, const ExprPtr& A_inst,
                      const std::string& xname, const ExprPtr& u_of,
                      const ExprPtr& ut, const ExprPtr& ux, const ExprPtr& uxx,
                      const std::map<std::string, ExprPtr>& coord_subst) {
  auto in_x = [&](const ExprPtr& e) {
    return coord_subst.empty() ? e : substitute(e, coord_subst);
  };
  std::map<std::string, ExprPtr> u_subst = {{"u", u_of}};
  auto in_u = [&](const ExprPtr& e) { return substitute(e, u_subst); };

  ExprPtr f = in_x(eq.f), g = in_x(eq.g), h = in_x(eq.h);
  ExprPtr gx = in_x(differentiate(eq.g, xname));
  ExprPtr Au = in_u(A_inst);
  ExprPtr Apu = in_u(differentiate(A_inst, "u"));
  ExprPtr Bu = in_u(eq.B);

  ResidualExpr out;
  out.terms.push_back(mul(f, ut));
  out.terms.push_back(mul(gx, Au, ux));
  out.terms.push_back(mul(g, Apu, pow(ux, 2)));
  out.terms.push_back(mul(g, Au, uxx));
  out.terms.push_back(mul(h, Bu, ux));
  ExprPtr res = sub(out.terms[0],
                    add({out.terms[1], out.terms[2], out.terms[3], out.terms[4]}));
  if (eq.reaction) {
    ExprPtr r = in_x(in_u(eq.reaction));
    out.terms.push_back(r);
    res = sub(res, r);
  }
  out.residual = res;
  return out;
}

}  // namespace

ResidualExpr residual_explicit(const EquationSpec& eq, const ExprPtr& U) {
  const std::string& x = eq.spatial;
  ExprPtr ut = differentiate(U, "t");
  ExprPtr ux = differentiate(U, x);
  ExprPtr uxx = differentiate(ux, x);
  return assemble(eq, eq.A, x, U, ut, ux, uxx, {});
}

ResidualExpr residual_implicit(const EquationSpec& eq, const ExprPtr& F) {
  const std::string& x = eq.spatial;
  ExprPtr Ft = differentiate(F, "t");
  ExprPtr Fx = differentiate(F, x);
  ExprPtr Fu = differentiate(F, "u");
  ExprPtr Fxx = differentiate(Fx, x);
  ExprPtr Fxu = differentiate(Fx, "u");
  ExprPtr Fuu = differentiate(Fu, "u");

  ExprPtr ut = neg(div(Ft, Fu));
  ExprPtr ux = neg(div(Fx, Fu));
  ExprPtr uxx = neg(div(
      add({Fxx, mul(num(2), Fxu, ux), mul(Fuu, pow(ux, 2))}), Fu));
  return assemble(eq, eq.A, x, var("u"), ut, ux, uxx, {});
}

ResidualExpr residual_parametric(const EquationSpec& eq, const ExprPtr& X,
                                 const ExprPtr& U) {
  const std::string& x = eq.spatial;
  ExprPtr Xt = differentiate(X, "t");
  ExprPtr Xxi = differentiate(X, "xi");
  ExprPtr Ut = differentiate(U, "t");
  ExprPtr Uxi = differentiate(U, "xi");

  ExprPtr ux = div(Uxi, Xxi);
  ExprPtr ut = sub(Ut, div(mul(Uxi, Xt), Xxi));
  ExprPtr uxx = div(differentiate(ux, "xi"), Xxi);
  std::map<std::string, ExprPtr> coord = {{x, X}};
  return assemble(eq, eq.A, x, U, ut, ux, uxx, coord);
}

bool solve_implicit_u(const ExprPtr& F, EvalContext& ctx, double lo, double hi,
                      double& root) {
  const int kScan = 48;
  auto feval = [&](double u) {
    ctx.values["u"] = u;
    return evaluate(F, ctx);
  };
  double prev_u = lo, prev_f;
  try {
    prev_f = feval(lo);
  } catch (const DomainFault&) {
    prev_f = std::numeric_limits<double>::quiet_NaN();
  }
  for (int i = 1; i <= kScan; ++i) {
    double u = lo + (hi - lo) * i / kScan;
    double fu;
    try {
      fu = feval(u);
    } catch (const DomainFault&) {
      fu = std::numeric_limits<double>::quiet_NaN();
      prev_u = u;
      prev_f = fu;
      continue;
    }
    if (std::isfinite(prev_f) && std::isfinite(fu) &&
        ((prev_f <= 0 && fu >= 0) || (prev_f >= 0 && fu <= 0))) {
      double a = prev_u, b = u, fa = prev_f;
      for (int it = 0; it < 80; ++it) {
        double m = 0.5 * (a + b);
        double fm;
        try {
          fm = feval(m);
        } catch (const DomainFault&) {
          return false;
        }
        if ((fa <= 0 && fm <= 0) || (fa >= 0 && fm >= 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
        if (std::abs(b - a) < 1e-14 * (1.0 + std::abs(a))) break;
      }
      root = 0.5 * (a + b);
      ctx.values["u"] = root;
      return true;
    }
    prev_u = u;
    prev_f = fu;
  }
  return false;
}

namespace {

struct SampleOutcome {
  bool ok = false;
  double rel = 0.0;
  bool fault = false;
};

// Relative residual at the point already loaded into ctx.
SampleOutcome eval_sample(const ResidualExpr& rex, EvalContext& ctx) {
  SampleOutcome out;
  ctx.min_clearance = 1e300;
  try {
    double r = evaluate(rex.residual, ctx);
    double denom = 1.0;
    for (auto& t : rex.terms) denom += std::abs(evaluate(t, ctx));
    if (ctx.min_clearance < 1e-6) {
      out.ok = false;  // too close to a singularity; reject
      return out;
    }
    if (!std::isfinite(r) || !std::isfinite(denom)) {
      out.fault = true;
      return out;
    }
    out.ok = true;
    out.rel = std::abs(r) / denom;
  } catch (const DomainFault&) {
    out.fault = true;
  }
  return out;
}

bool require_ok(const DomainSpec& dom, EvalContext& ctx) {
  for (auto& req : dom.require_positive) {
    try {
      if (!(evaluate(req, ctx) > 0)) return false;
    } catch (const DomainFault&) {
      return false;
    }
  }
  return true;
}

}  // namespace

VerificationReport verify_entry(const Catalog& cat, const SolutionEntry& entry,
                                const VerifyOptions& opts) {
  VerificationReport rep;
  rep.entry = entry.id;
  rep.seed = opts.seed;
  const EquationSpec& eq = cat.equation(entry.equation);

  ExprPtr main_expr = entry.form == SolForm::Explicit ? entry.U
                      : entry.form == SolForm::Implicit ? entry.F
                                                        : add(entry.PX, entry.PU);
  if (contains_unsupported(main_expr)) {
    rep.status = Status::SkippedSpecial;
    rep.notes = "expression uses a declared-unsupported special function";
    return rep;
  }

  ResidualExpr rex;
  try {
    if (entry.form == SolForm::Explicit)
      rex = residual_explicit(eq, entry.U);
    else if (entry.form == SolForm::Implicit)
      rex = residual_implicit(eq, entry.F);
    else
      rex = residual_parametric(eq, entry.PX, entry.PU);
  } catch (const std::exception& e) {
    rep.status = Status::Inconclusive;
    rep.notes = std::string("residual construction failed: ") + e.what();
    return rep;
  }

  auto constraints = merge_constraints(eq.params, entry.params);

  const std::string sample_var =
      entry.form == SolForm::Parametric ? "xi" : eq.spatial;
  Interval tbox{0.3, 1.5}, sbox{0.4, 2.0}, ubox{0.2, 3.0};
  if (auto* b = entry.domain.find("t")) tbox = *b;
  if (auto* b = entry.domain.find(sample_var)) sbox = *b;
  if (auto* b = entry.domain.find("u")) ubox = *b;

  double worst = 0.0;
  bool refuted = false;
  int accepted_total = 0, rejected_total = 0;
  std::string note;

  for (int d = 0; d < opts.param_draws; ++d) {
    std::map<std::string, double> vals;
    try {
      vals = draw_parameters(constraints, opts.seed, "verify/" + entry.id, d);
    } catch (const CatalogError& e) {
      rep.status = Status::Inconclusive;
      rep.notes = e.what();
      return rep;
    }
    rep.params.push_back(vals);

    EvalContext ctx;
    ctx.values = vals;
    SplitMix64 rng = substream(opts.seed, "samples/" + entry.id, d);
    StratifiedSampler strat(rng, 2, static_cast<uint32_t>(opts.samples));

    int accepted = 0;
    int budget = opts.max_oversample * opts.samples;
    uint32_t idx = 0;
    while (accepted < opts.samples && budget-- > 0) {
      uint32_t i = idx++;
      ctx.values["t"] = strat.coord(rng, 0, i, tbox.lo, tbox.hi);
      ctx.values[sample_var] = strat.coord(rng, 1, i, sbox.lo, sbox.hi);
      if (entry.form == SolForm::Implicit) {
        double root;
        ctx.min_clearance = 1e300;
        bool found;
        try {
          found = solve_implicit_u(entry.F, ctx, ubox.lo, ubox.hi, root);
        } catch (const std::exception&) {
          found = false;
        }
        if (!found) {
          ++rejected_total;
          continue;
        }
        // degenerate F_u clearance
        try {
          double fu = evaluate(differentiate(entry.F, "u"), ctx);
          if (std::abs(fu) < 1e-8) {
            ++rejected_total;
            continue;
          }
        } catch (const DomainFault&) {
          ++rejected_total;
          continue;
        }
      }
      if (!require_ok(entry.domain, ctx)) {
        ++rejected_total;
        continue;
      }
      SampleOutcome so = eval_sample(rex, ctx);
      if (!so.ok) {
        ++rejected_total;
        continue;
      }
      ++accepted;
      ++accepted_total;
      worst = std::max(worst, so.rel);
      if (so.rel > 1000.0 * opts.tolerance) refuted = true;
    }
    if (accepted < opts.samples) {
      note = "insufficient admissible samples (draw " + std::to_string(d) + ")";
    }
  }

  rep.samples = accepted_total;
  rep.rejected = rejected_total;
  rep.max_rel_residual = worst;

  int needed = opts.samples * opts.param_draws;
  if (refuted) {
    rep.status = Status::Refuted;
  } else if (accepted_total >= std::max(opts.samples, needed) &&
             worst < opts.tolerance) {
    rep.status = Status::Verified;
  } else {
    rep.status = Status::Inconclusive;
    if (note.empty())
      note = "max relative residual " + std::to_string(worst) +
             " not within tolerance";
  }
  if (!note.empty()) rep.notes = note;
  if (!entry.notes.empty())
    rep.notes = rep.notes.empty() ? entry.notes : rep.notes + "; " + entry.notes;
  return rep;
}

namespace {

// Rebuilds e with the first preorder Add node's first term negated.
ExprPtr negate_first_add(const ExprPtr& e, bool& done) {
  if (done) return e;
  if (e->kind == Kind::Add) {
    done = true;
    std::vector<ExprPtr> ks = e->kids;
    ks[0] = neg(ks[0]);
    return add(std::move(ks));
  }
  std::vector<ExprPtr> ks = e->kids;
  bool changed = false;
  for (auto& k : ks) {
    auto nk = negate_first_add(k, done);
    changed = changed || nk.get() != k.get();
    k = nk;
    if (done) break;
  }
  if (!changed) return e;
  switch (e->kind) {
    case Kind::Neg: return neg(ks[0]);
    case Kind::Mul: return mul(std::move(ks));
    case Kind::Div: return div(ks[0], ks[1]);
    case Kind::Pow: return pow(ks[0], ks[1]);
    case Kind::Quad: return quad(e->name, ks[0], ks[1], ks[2]);
    default:
      if (ks.size() == 1) return fn(e->kind, ks[0]);
      return fn2(e->kind, ks[0], ks[1]);
  }
}

ExprPtr perturb_first_number(const ExprPtr& e, bool& done) {
  if (done) return e;
  if (e->kind == Kind::Number && e->number != 0) {
    done = true;
    return num(e->number * Rational(11, 10));
  }
  std::vector<ExprPtr> ks = e->kids;
  bool changed = false;
  for (auto& k : ks) {
    auto nk = perturb_first_number(k, done);
    changed = changed || nk.get() != k.get();
    k = nk;
    if (done) break;
  }
  if (!changed) return e;
  switch (e->kind) {
    case Kind::Neg: return neg(ks[0]);
    case Kind::Add: return add(std::move(ks));
    case Kind::Mul: return mul(std::move(ks));
    case Kind::Div: return div(ks[0], ks[1]);
    case Kind::Pow: return pow(ks[0], ks[1]);
    case Kind::Quad: return quad(e->name, ks[0], ks[1], ks[2]);
    default:
      if (ks.size() == 1) return fn(e->kind, ks[0]);
      return fn2(e->kind, ks[0], ks[1]);
  }
}

}  // namespace

ExprPtr mutate_negate_term(const ExprPtr& e) {
  bool done = false;
  ExprPtr r = negate_first_add(e, done);
  return done ? r : neg(e);
}

ExprPtr mutate_perturb_constant(const ExprPtr& e) {
  bool done = false;
  ExprPtr r = perturb_first_number(e, done);
  return done ? r : mul(num(11, 10), e);
}

ExprPtr mutate_swap_tx(const ExprPtr& e, const std::string& spatial) {
  return substitute(e, {{"t", var(spatial)}, {spatial, var("t")}});
}

}  // namespace dcx
