#pragma once

#include "dcx/model.hpp"
#include "dcx/report.hpp"

namespace dcx {

// Jet coordinates used on top of (t, x, u):
//   ut, ux, uxx, uxxx, utx
// Admissible points substitute ut and utx from the equation.
struct JetPoint {
  double t, x, u, ux, uxx, uxxx;
  std::map<std::string, double> params;
};

struct Prolongation {
  ExprPtr eta_t;   // coefficient of d/du_t
  ExprPtr eta_x;   // coefficient of d/du_x
  ExprPtr eta_xx;  // coefficient of d/du_xx
};

// Second prolongation coefficients of tau d_t + xi d_x + eta d_u.
Prolongation prolong2(const ExprPtr& tau, const ExprPtr& xi, const ExprPtr& eta);

// The invariance defect |pr2 Q (Delta)| / (1 + sum |term|) evaluated on the
// equation manifold at a jet point.  Built once, evaluated many times.
class InvarianceChecker {
public:
  InvarianceChecker(const EquationSpec& eq, const ExprPtr& A_instance,
                    const VectorFieldSpec& field);

  // Throws DomainFault when the jet point is inadmissible; caller redraws.
  double defect(const JetPoint& jp) const;

private:
  ExprPtr defect_expr_;
  std::vector<ExprPtr> terms_;
};

struct FieldCheck {
  std::string field_id;
  bool pass = false;
  double max_defect = 0.0;
  std::string notes;
};

struct CommutatorEntry {
  std::string a, b;
  double closure_residual = 0.0;  // least-squares mismatch against the span
  std::vector<double> coefficients;
  bool pass = false;
};

struct AlgebraCheck {
  std::vector<FieldCheck> fields;
  std::vector<CommutatorEntry> commutators;
  bool all_fields_pass = false;
  bool closure_pass = false;
};

// Per-field invariance at `points` jet points (defect < tol each), plus
// pairwise commutator closure against the span of the basis.
AlgebraCheck check_algebra(const Catalog& cat, const EquationSpec& eq,
                           const std::vector<const VectorFieldSpec*>& fields,
                           uint64_t seed, int points = 16, double tol = 1e-8);

VerificationReport check_field(const Catalog& cat, const VectorFieldSpec& vf,
                               uint64_t seed, int points = 16,
                               double tol = 1e-8);

// Symbolic commutator [Q1, Q2] of two vector fields on (t, x, u).
void commutator(const ExprPtr& t1, const ExprPtr& x1, const ExprPtr& e1,
                const ExprPtr& t2, const ExprPtr& x2, const ExprPtr& e2,
                ExprPtr& tc, ExprPtr& xc, ExprPtr& ec);

}  // namespace dcx
