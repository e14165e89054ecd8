#include <cmath>
#include <limits>

#include "dcx/expr.hpp"
#include "dcx/special.hpp"

namespace dcx {

namespace {

constexpr double kDivGuard = 1e-13;

void monitor(const EvalContext& ctx, double magnitude) {
  if (magnitude < ctx.min_clearance) ctx.min_clearance = magnitude;
}

double eval_pow(const EvalContext& ctx, double b, const ExprPtr& expo,
                double p) {
  bool integral = false;
  long long n = 0;
  if (expo->kind == Kind::Number &&
      boost::multiprecision::denominator(expo->number) == 1) {
    auto nn = boost::multiprecision::numerator(expo->number);
    if (nn >= -1024 && nn <= 1024) {
      integral = true;
      n = nn.convert_to<long long>();
    }
  } else if (p == std::floor(p) && std::abs(p) <= 1024) {
    integral = true;
    n = static_cast<long long>(p);
  }
  if (integral) {
    if (n < 0) {
      monitor(ctx, std::abs(b));
      if (std::abs(b) < kDivGuard)
        throw DomainFault("negative power of a near-zero base");
    }
    return std::pow(b, static_cast<double>(n));
  }
  if (p < 0) {
    monitor(ctx, std::abs(b));
    if (std::abs(b) < kDivGuard)
      throw DomainFault("negative power of a near-zero base");
  }
  if (b < 0) throw DomainFault("fractional power of a negative base");
  if (b == 0 && p < 0) throw DomainFault("negative power of zero");
  return std::pow(b, p);
}

}  // namespace

double evaluate(const ExprPtr& e, const EvalContext& ctx) {
  switch (e->kind) {
    case Kind::Number:
      return e->number_cache;
    case Kind::ConstPi:
      return 3.14159265358979323846;
    case Kind::ConstEuler:
      return 2.71828182845904523536;
    case Kind::Param:
    case Kind::Var:
      return ctx.get(e->name);
    case Kind::Neg:
      return -evaluate(e->kids[0], ctx);
    case Kind::Add: {
      double s = 0;
      for (auto& k : e->kids) s += evaluate(k, ctx);
      return s;
    }
    case Kind::Mul: {
      double p = 1;
      for (auto& k : e->kids) p *= evaluate(k, ctx);
      return p;
    }
    case Kind::Div: {
      double a = evaluate(e->kids[0], ctx);
      double b = evaluate(e->kids[1], ctx);
      monitor(ctx, std::abs(b));
      if (std::abs(b) < kDivGuard) throw DomainFault("division by near-zero");
      return a / b;
    }
    case Kind::Pow: {
      double b = evaluate(e->kids[0], ctx);
      double p = evaluate(e->kids[1], ctx);
      return eval_pow(ctx, b, e->kids[1], p);
    }
    case Kind::Abs:
      return std::abs(evaluate(e->kids[0], ctx));
    case Kind::Sign: {
      double v = evaluate(e->kids[0], ctx);
      return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
    }
    case Kind::Exp: {
      double v = evaluate(e->kids[0], ctx);
      if (v > 700) throw DomainFault("exp overflow");
      return std::exp(v);
    }
    case Kind::Ln: {
      double v = evaluate(e->kids[0], ctx);
      monitor(ctx, std::abs(v));
      if (!(v > 0)) throw DomainFault("ln of a nonpositive argument");
      return std::log(v);
    }
    case Kind::Sqrt: {
      double v = evaluate(e->kids[0], ctx);
      if (v < 0) throw DomainFault("sqrt of a negative argument");
      return std::sqrt(v);
    }
    case Kind::Sin: return std::sin(evaluate(e->kids[0], ctx));
    case Kind::Cos: return std::cos(evaluate(e->kids[0], ctx));
    case Kind::Tan: {
      double c = std::cos(evaluate(e->kids[0], ctx));
      monitor(ctx, std::abs(c));
      if (std::abs(c) < kDivGuard) throw DomainFault("tan near a pole");
      return std::sin(evaluate(e->kids[0], ctx)) / c;
    }
    case Kind::Asin: {
      double v = evaluate(e->kids[0], ctx);
      if (v > 1.0 && v <= 1.0 + 1e-12) v = 1.0;
      if (v < -1.0 && v >= -1.0 - 1e-12) v = -1.0;
      if (v < -1.0 || v > 1.0) throw DomainFault("asin argument outside [-1,1]");
      return std::asin(v);
    }
    case Kind::Acos: {
      double v = evaluate(e->kids[0], ctx);
      if (v > 1.0 && v <= 1.0 + 1e-12) v = 1.0;
      if (v < -1.0 && v >= -1.0 - 1e-12) v = -1.0;
      if (v < -1.0 || v > 1.0) throw DomainFault("acos argument outside [-1,1]");
      return std::acos(v);
    }
    case Kind::Atan: return std::atan(evaluate(e->kids[0], ctx));
    case Kind::Sinh: return std::sinh(evaluate(e->kids[0], ctx));
    case Kind::Cosh: return std::cosh(evaluate(e->kids[0], ctx));
    case Kind::Tanh: return std::tanh(evaluate(e->kids[0], ctx));
    case Kind::Erf: return std::erf(evaluate(e->kids[0], ctx));
    case Kind::LambertW: return lambert_w(evaluate(e->kids[0], ctx));
    case Kind::ExpInt1: return expint1(evaluate(e->kids[0], ctx));
    case Kind::BesselJ:
    case Kind::BesselY: {
      if (!ctx.bessel_backend)
        throw UnsupportedSpecialFunction("unsupported-special-function: bessel");
      double nu = evaluate(e->kids[0], ctx);
      double z = evaluate(e->kids[1], ctx);
      if (e->kind == Kind::BesselJ) return std::cyl_bessel_j(nu, z);
      return std::cyl_neumann(nu, z);
    }
    case Kind::ParCylU:
    case Kind::ParCylV:
    case Kind::ParCylW:
      throw UnsupportedSpecialFunction(
          "unsupported-special-function: parabolic cylinder");
    case Kind::Quad: {
      double lo = evaluate(e->kids[1], ctx);
      double hi = evaluate(e->kids[2], ctx);
      EvalContext inner = ctx;
      inner.min_clearance = 1e300;
      const ExprPtr& g = e->kids[0];
      const std::string& dummy = e->name;
      auto f = [&](double s) {
        inner.values[dummy] = s;
        return evaluate(g, inner);
      };
      double v = integrate(f, lo, hi, ctx.quad_tol);
      monitor(ctx, inner.min_clearance);
      return v;
    }
  }
  throw std::logic_error("unhandled node kind in evaluate");
}

double finite_difference_check(const ExprPtr& e, const std::string& v,
                               EvalContext ctx, double step) {
  ExprPtr de = differentiate(e, v);
  double sym = evaluate(de, ctx);
  double x0 = ctx.get(v);
  ctx.values[v] = x0 + step;
  double fp = evaluate(e, ctx);
  ctx.values[v] = x0 - step;
  double fm = evaluate(e, ctx);
  ctx.values[v] = x0;
  double fd = (fp - fm) / (2.0 * step);
  return std::abs(sym - fd) / (1.0 + std::abs(sym));
}

}  // namespace dcx
