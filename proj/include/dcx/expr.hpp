#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcx {

using Rational = boost::multiprecision::cpp_rational;

enum class Kind {
  Number,
  ConstPi,
  ConstEuler,
  Param,
  Var,
  Neg,
  Add,
  Mul,
  Div,
  Pow,
  Abs,
  Sign,
  Exp,
  Ln,
  Sqrt,
  Sin,
  Cos,
  Tan,
  Asin,
  Acos,
  Atan,
  Sinh,
  Cosh,
  Tanh,
  Erf,
  LambertW,
  ExpInt1,
  BesselJ,   // children: order, argument
  BesselY,   // children: order, argument
  ParCylU,   // declared but unsupported; children: order, argument
  ParCylV,
  ParCylW,
  Quad,      // antiderivative node; children: integrand, lower, upper
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
public:
  Kind kind;
  Rational number;              // Kind::Number
  double number_cache = 0.0;    // cached double of `number`
  std::string name;             // Param/Var name, or Quad dummy
  std::vector<ExprPtr> kids;

  Expr(Kind k) : kind(k) {}
};

// Evaluation faults. `domain_fault` covers ln/sqrt/division/quadrature
// problems; `unsupported_special_function` is raised for bessel/parcyl
// evaluation without a backend.
struct DomainFault : std::runtime_error {
  explicit DomainFault(const std::string& what) : std::runtime_error(what) {}
};
struct UnsupportedSpecialFunction : std::runtime_error {
  explicit UnsupportedSpecialFunction(const std::string& what)
      : std::runtime_error(what) {}
};

struct EvalContext {
  std::map<std::string, double> values;  // parameters and variables
  double quad_tol = 1e-12;
  bool bessel_backend = false;

  // Smallest magnitude seen among division denominators, negative-power
  // bases and ln arguments during the last evaluate() call.  Residual
  // sampling uses it to reject near-singular points.
  mutable double min_clearance = 1e300;

  double get(const std::string& n) const;
};

// ---- constructors (with constant folding and sum/product flattening) ----
ExprPtr num(const Rational& r);
ExprPtr num(long long n);
ExprPtr num(long long n, long long d);
ExprPtr num_from_double(double v);
ExprPtr pi();
ExprPtr euler();
ExprPtr param(const std::string& name);
ExprPtr var(const std::string& name);
ExprPtr neg(ExprPtr e);
ExprPtr add(std::vector<ExprPtr> terms);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(std::vector<ExprPtr> factors);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b, ExprPtr c);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr pow(ExprPtr base, ExprPtr expo);
ExprPtr pow(ExprPtr base, long long expo);
ExprPtr fn(Kind k, ExprPtr arg);                 // unary functions
ExprPtr fn2(Kind k, ExprPtr a, ExprPtr b);       // besselj/bessely/parcyl*
ExprPtr quad(const std::string& dummy, ExprPtr integrand, ExprPtr lower,
             ExprPtr upper);

// ---- queries ----
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);
bool contains_kind(const ExprPtr& e, Kind k);
bool contains_unsupported(const ExprPtr& e);     // bessel or parcyl
bool contains_free_name(const ExprPtr& e, const std::string& n);
void free_names(const ExprPtr& e, std::set<std::string>& out);
bool is_number(const ExprPtr& e, const Rational& v);

// ---- core operations ----
ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& m);
ExprPtr differentiate(const ExprPtr& e, const std::string& var);
double evaluate(const ExprPtr& e, const EvalContext& ctx);
std::string format(const ExprPtr& e);

// |symbolic - central difference| / (1 + |symbolic|) at the point in ctx.
double finite_difference_check(const ExprPtr& e, const std::string& var,
                               EvalContext ctx, double step);

}  // namespace dcx
