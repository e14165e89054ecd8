#pragma once

#include "dcx/model.hpp"
#include "dcx/report.hpp"

namespace dcx {

struct ReductionResult {
  bool pass = false;
  double max_mismatch = 0.0;
  std::vector<double> multipliers;
  bool multiplier_sign_change = false;  // flagged, not failed
  std::string notes;
};

// Two-test-function multiplier check: with u = ansatz(phi(omega); t, x) the
// PDE residual P and reduced residual R must satisfy P = M(t,x) R with M
// independent of phi and nonvanishing.
ReductionResult reduction_consistency(const Catalog& cat,
                                      const ReductionRow& row, uint64_t seed);

VerificationReport check_reduction(const Catalog& cat, const ReductionRow& row,
                                   uint64_t seed);

// Substitutes degree-3 Taylor jets consistent with the first-order system
// into the ansatz and requires the PDE residual to vanish identically in the
// remaining coordinate.
VerificationReport verify_functional_ansatz(const Catalog& cat,
                                            const FunctionalAnsatzRow& row,
                                            uint64_t seed);

// Particular closed-form solutions of reduced ODEs stated in the text.
std::vector<VerificationReport> verify_reduced_ode_solutions(uint64_t seed);

}  // namespace dcx
