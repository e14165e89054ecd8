#pragma once

#include "dcx/model.hpp"
#include "dcx/report.hpp"

namespace dcx {

// The PDE residual of f u_t = (g A(u) u_x)_x + h B(u) u_x [+ reaction],
// kept together with its additive terms for relative normalization:
// relative residual = |residual| / (1 + sum |term|).
struct ResidualExpr {
  ExprPtr residual;
  std::vector<ExprPtr> terms;
};

// Explicit u = U(t, x): residual as an expression in (t, x).
ResidualExpr residual_explicit(const EquationSpec& eq, const ExprPtr& U);

// Implicit F(t, x, u) = 0: residual in (t, x, u) with u_t, u_x, u_xx
// eliminated through implicit differentiation.
ResidualExpr residual_implicit(const EquationSpec& eq, const ExprPtr& F);

// Parametric x = X(t, xi), u = U(t, xi): residual in (t, xi).
ResidualExpr residual_parametric(const EquationSpec& eq, const ExprPtr& X,
                                 const ExprPtr& U);

struct VerifyOptions {
  uint64_t seed = 7;
  double tolerance = 1e-8;
  int samples = 32;
  int param_draws = 3;
  int max_oversample = 20;  // rejected-sample budget = max_oversample * samples
};

VerificationReport verify_entry(const Catalog& cat, const SolutionEntry& entry,
                                const VerifyOptions& opts);

// Solve F(t, x, u) = 0 for u on [lo, hi] by bracket scan + bisection.
// Returns false when no sign change is found.
bool solve_implicit_u(const ExprPtr& F, EvalContext& ctx, double lo, double hi,
                      double& root);

// The three standard mutations used by the soundness suite.
ExprPtr mutate_negate_term(const ExprPtr& e);
ExprPtr mutate_perturb_constant(const ExprPtr& e);
ExprPtr mutate_swap_tx(const ExprPtr& e, const std::string& spatial);

}  // namespace dcx
