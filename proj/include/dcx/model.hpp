#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcx/expr.hpp"
#include "dcx/rng.hpp"

namespace dcx {

struct CatalogError : std::runtime_error {
  explicit CatalogError(const std::string& what) : std::runtime_error(what) {}
};

struct ParamConstraint {
  std::string name;
  bool discrete = false;
  std::vector<double> choices;   // discrete sets like {-1, 1}
  double lo = 0.0, hi = 1.0;     // interval draw
  std::vector<double> excluded;  // kept at distance >= 0.05
};

struct Interval {
  double lo = 0.0, hi = 1.0;
};

struct DomainSpec {
  std::vector<std::pair<std::string, Interval>> box;  // sampling box per name
  std::vector<ExprPtr> require_positive;  // predicates, must be > 0

  const Interval* find(const std::string& name) const {
    for (auto& kv : box)
      if (kv.first == name) return &kv.second;
    return nullptr;
  }
};

struct EquationSpec {
  std::string id;
  ExprPtr f, g, h;      // spatial weights (may reference t for generated targets)
  ExprPtr A, B;         // nonlinearities in u
  ExprPtr reaction;     // extra zeroth-order term, nullptr if absent
  bool forall_A = false;  // classification rows valid for arbitrary A(u)
  std::string spatial = "x";
  std::vector<ParamConstraint> params;
  DomainSpec domain;
  std::string citation;
  std::string notes;
};

enum class SolForm { Explicit, Implicit, Parametric };
enum class ExpectedStatus { Verified, SkippedSpecial, KnownDiscrepancy };

struct SolutionEntry {
  std::string id, equation;
  SolForm form = SolForm::Explicit;
  bool quadrature = false;  // implicit/parametric containing quad nodes
  ExprPtr U;                // explicit
  ExprPtr F;                // implicit
  ExprPtr PX, PU;           // parametric
  std::vector<ParamConstraint> params;
  DomainSpec domain;
  ExpectedStatus expected = ExpectedStatus::Verified;
  std::string citation;
  std::string notes;
};

struct VectorFieldSpec {
  std::string id, equation;
  ExprPtr tau, xi, eta;  // in (t, x, u)
  std::vector<ParamConstraint> params;
  std::string citation;
  std::string notes;
};

struct PointTransformSpec {
  std::string id, source, target;
  ExprPtr fwd_t, fwd_x, fwd_u;  // target coords from source (t, x, u)
  ExprPtr inv_t, inv_x, inv_u;  // source coords from target, written in t,x,u
  std::vector<ParamConstraint> params;
  DomainSpec domain;        // source-side sampling box for (t, x, u)
  std::string push_src, push_tgt;  // optional pushforward pair
  std::map<std::string, ExprPtr> push_match;  // target params from source params
  DomainSpec push_domain;   // target-side box for verifying the image
  ExpectedStatus expected = ExpectedStatus::Verified;
  std::string citation;
  std::string notes;
};

enum class ReductionMode { Multiplier, Family };

struct ReductionRow {
  std::string id, equation;
  ExprPtr ansatz;   // in (t, x, phi)
  ExprPtr omega;    // in (t, x)
  ExprPtr reduced;  // in (w, phi0, phi1, phi2)
  ReductionMode mode = ReductionMode::Multiplier;
  double phi_shift = 0.0;   // cubic test functions: shift + coeffs in +-scale
  double phi_scale = 1.0;
  std::vector<ParamConstraint> params;
  DomainSpec domain;  // (t, x) sampling box
  std::string citation;
  std::string notes;
};

struct FunctionalAnsatzRow {
  std::string id, equation;
  bool parametric = false;
  std::string arg = "t";  // coordinate the functions depend on: t, x or xi
  std::vector<std::string> functions;
  std::map<std::string, ExprPtr> system;  // fn name -> first-order RHS
  ExprPtr U;        // explicit ansatz
  ExprPtr PX, PU;   // parametric ansatz
  std::map<std::string, Interval> draw;  // value ranges for function draws
  std::vector<ParamConstraint> params;
  DomainSpec domain;
  std::string citation;
  std::string notes;
};

struct NonlocalRuleSpec {
  std::string id, equation, target;
  ExprPtr rule;  // in (t, x, u, ut, ux)
  std::string seed_solution;
  DomainSpec push_domain;
  std::vector<ParamConstraint> params;
  ExpectedStatus expected = ExpectedStatus::Verified;
  std::string citation;
  std::string notes;
};

struct HodographPairSpec {
  std::string id;
  std::string source_sol, target_sol;
  ExprPtr potential;  // v(t,x) with v_x = u, v_t = A(u) u_x
  ExprPtr uscale;     // image = uscale * target(t + tshift, argscale*v + fitted)
  ExprPtr argscale;
  ExprPtr tshift;
  std::map<std::string, ExprPtr> target_params;  // pins for the target side
  std::vector<ParamConstraint> params;
  DomainSpec domain;  // source-side (t, x) box
  ExpectedStatus expected = ExpectedStatus::Verified;
  std::string citation;
  std::string notes;
};

struct Catalog {
  std::vector<EquationSpec> equations;
  std::vector<SolutionEntry> solutions;
  std::vector<VectorFieldSpec> vectorfields;
  std::vector<PointTransformSpec> transforms;
  std::vector<ReductionRow> reductions;
  std::vector<FunctionalAnsatzRow> ansatz_systems;
  std::vector<NonlocalRuleSpec> nonlocal_rules;
  std::vector<HodographPairSpec> hodograph_pairs;

  const EquationSpec& equation(const std::string& id) const;
  const SolutionEntry& solution(const std::string& id) const;
  const PointTransformSpec& transform(const std::string& id) const;
  const ReductionRow& reduction(const std::string& id) const;
};

// Loads and validates a .dcx catalog file.  Throws CatalogError with a
// file:line location on parse errors, dangling references or invariant
// violations.
Catalog load_catalog(const std::string& path);
Catalog load_catalog_text(const std::string& text, const std::string& origin);

// Deterministic parameter draw honoring intervals, exclusions (distance
// >= 0.05) and discrete sets.  Throws CatalogError when unsatisfiable.
std::map<std::string, double> draw_parameters(
    const std::vector<ParamConstraint>& constraints, uint64_t seed,
    const std::string& label, uint64_t index);

// Record-level constraints override equation-level ones per name.
std::vector<ParamConstraint> merge_constraints(
    const std::vector<ParamConstraint>& base,
    const std::vector<ParamConstraint>& overrides);

std::string to_string(ExpectedStatus s);

// Concrete instantiations used for "arbitrary A(u)" classification rows.
std::vector<ExprPtr> forall_A_instances();

}  // namespace dcx
