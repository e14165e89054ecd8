#pragma once

#include <array>

#include "dcx/model.hpp"
#include "dcx/report.hpp"

namespace dcx {

// Composes U(t, x, u(t, x)) with the inverse coordinate maps, giving the
// pushed-forward solution written in the target coordinates (named t, x).
ExprPtr apply_point_transform(const PointTransformSpec& tr, const ExprPtr& u_src);

// Mutual-inverse check plus (when declared) one solution pushforward with
// re-verification against the target and matching to the cataloged target
// solution.
VerificationReport check_transform(const Catalog& cat,
                                   const PointTransformSpec& tr, uint64_t seed);

// The general solution of the heat equation generated from f by the full
// symmetry group, plus superposition with v.
ExprPtr heat_group_action(const ExprPtr& f, const std::array<double, 6>& eps,
                          const ExprPtr& v);

// Substitutes u, u_t, u_x of the seed into the rule and verifies the output.
VerificationReport check_nonlocal_rule(const Catalog& cat,
                                       const NonlocalRuleSpec& rule,
                                       uint64_t seed);
ExprPtr apply_nonlocal_rule(const NonlocalRuleSpec& rule, const ExprPtr& u_src,
                            const std::string& spatial);

// Potential hodograph pairing: checks v_x = u and v_t = A(u) u_x, then that
// (t, v) -> 1/u reproduces the declared target member up to an x-translation
// fitted at one point.
VerificationReport check_hodograph_pair(const Catalog& cat,
                                        const HodographPairSpec& pair,
                                        uint64_t seed);

// v = 2 w_x / w, residual-verified against v_t = v_xx + v v_x - 2 p v.
ExprPtr cole_hopf(const ExprPtr& w);

// Polynomial heat solutions and the antiderivative chain.
ExprPtr heat_polynomial(int m, bool odd);
ExprPtr chain_next(const ExprPtr& f);  // g with g_x = f, g_t = f_x

}  // namespace dcx
