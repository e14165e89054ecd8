#include "dcx/expr.hpp"

#include <algorithm>
#include <cmath>

namespace dcx {

namespace {

std::shared_ptr<Expr> make(Kind k) { return std::make_shared<Expr>(k); }

bool is_int(const Rational& r) { return boost::multiprecision::denominator(r) == 1; }

bool fits_ll(const boost::multiprecision::cpp_int& v, long long& out) {
  if (v < std::numeric_limits<long long>::min() ||
      v > std::numeric_limits<long long>::max())
    return false;
  out = v.convert_to<long long>();
  return true;
}

}  // namespace

double EvalContext::get(const std::string& n) const {
  auto it = values.find(n);
  if (it == values.end())
    throw DomainFault("unbound symbol '" + n + "'");
  return it->second;
}

ExprPtr num(const Rational& r) {
  auto e = std::make_shared<Expr>(Kind::Number);
  e->number = r;
  e->number_cache = r.convert_to<double>();
  return e;
}
ExprPtr num(long long n) { return num(Rational(n)); }
ExprPtr num(long long n, long long d) { return num(Rational(n) / d); }
ExprPtr num_from_double(double v) {
  if (!std::isfinite(v)) throw DomainFault("non-finite constant");
  return num(Rational(v));
}
ExprPtr pi() { return make(Kind::ConstPi); }
ExprPtr euler() { return make(Kind::ConstEuler); }

ExprPtr param(const std::string& name) {
  auto e = make(Kind::Param);
  e->name = name;
  return e;
}
ExprPtr var(const std::string& name) {
  auto e = make(Kind::Var);
  e->name = name;
  return e;
}

bool is_number(const ExprPtr& e, const Rational& v) {
  return e->kind == Kind::Number && e->number == v;
}

// Canonical negation: distributes over sums (so subtraction cancels like
// terms) and otherwise folds into the Mul(-1, ...) shape the parser produces.
ExprPtr neg(ExprPtr e) {
  if (e->kind == Kind::Number) return num(-e->number);
  if (e->kind == Kind::Add) {
    std::vector<ExprPtr> ts;
    ts.reserve(e->kids.size());
    for (auto& k : e->kids) ts.push_back(neg(k));
    return add(std::move(ts));
  }
  return mul(num(-1), std::move(e));
}

namespace {

// Splits a term into (rational coefficient, core) for like-term grouping.
std::pair<Rational, ExprPtr> split_coeff(const ExprPtr& t) {
  if (t->kind == Kind::Number) return {t->number, nullptr};
  if (t->kind == Kind::Neg) {
    auto [c, core] = split_coeff(t->kids[0]);
    return {-c, core};
  }
  if (t->kind == Kind::Mul && !t->kids.empty() &&
      t->kids[0]->kind == Kind::Number) {
    if (t->kids.size() == 2) return {t->kids[0]->number, t->kids[1]};
    auto rest = make(Kind::Mul);
    rest->kids.assign(t->kids.begin() + 1, t->kids.end());
    return {t->kids[0]->number, rest};
  }
  return {Rational(1), t};
}

ExprPtr rebuild_term(const Rational& c, const ExprPtr& core) {
  if (core == nullptr) return num(c);
  if (c == 0) return num(0);
  if (c == 1) return core;
  std::vector<ExprPtr> ks;
  ks.push_back(num(c));
  if (core->kind == Kind::Mul)
    ks.insert(ks.end(), core->kids.begin(), core->kids.end());
  else
    ks.push_back(core);
  auto r = make(Kind::Mul);
  r->kids = std::move(ks);
  return r;
}

}  // namespace

ExprPtr add(std::vector<ExprPtr> terms) {
  std::vector<ExprPtr> flat;
  for (auto& t : terms) {
    if (t->kind == Kind::Add)
      flat.insert(flat.end(), t->kids.begin(), t->kids.end());
    else
      flat.push_back(t);
  }
  // group structurally equal cores; exact rational coefficient arithmetic
  std::vector<std::pair<Rational, ExprPtr>> groups;
  for (auto& t : flat) {
    auto [c, core] = split_coeff(t);
    bool merged = false;
    for (auto& g : groups) {
      bool same = (g.second == nullptr && core == nullptr) ||
                  (g.second != nullptr && core != nullptr &&
                   structurally_equal(g.second, core));
      if (same) {
        g.first += c;
        merged = true;
        break;
      }
    }
    if (!merged) groups.emplace_back(c, core);
  }
  std::vector<ExprPtr> out;
  for (auto& g : groups) {
    if (g.first == 0) continue;
    out.push_back(rebuild_term(g.first, g.second));
  }
  if (out.empty()) return num(0);
  if (out.size() == 1) return out[0];
  auto r = make(Kind::Add);
  r->kids = std::move(out);
  return r;
}

ExprPtr add(ExprPtr a, ExprPtr b) { return add(std::vector<ExprPtr>{a, b}); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return add(a, neg(b)); }

ExprPtr mul(std::vector<ExprPtr> factors) {
  std::vector<ExprPtr> flat;
  Rational c(1);
  bool negate = false;
  for (auto& f : factors) {
    ExprPtr g = f;
    while (g->kind == Kind::Neg) {
      negate = !negate;
      g = g->kids[0];
    }
    if (g->kind == Kind::Mul) {
      for (auto& k : g->kids) {
        if (k->kind == Kind::Number)
          c *= k->number;
        else
          flat.push_back(k);
      }
    } else if (g->kind == Kind::Number) {
      c *= g->number;
    } else {
      flat.push_back(g);
    }
  }
  if (negate) c = -c;
  if (c == 0) return num(0);
  std::vector<ExprPtr> out;
  if (c != 1) out.push_back(num(c));
  out.insert(out.end(), flat.begin(), flat.end());
  if (out.empty()) return num(1);
  if (out.size() == 1) return out[0];
  auto r = make(Kind::Mul);
  r->kids = std::move(out);
  return r;
}

ExprPtr mul(ExprPtr a, ExprPtr b) { return mul(std::vector<ExprPtr>{a, b}); }
ExprPtr mul(ExprPtr a, ExprPtr b, ExprPtr c) {
  return mul(std::vector<ExprPtr>{a, b, c});
}

ExprPtr div(ExprPtr a, ExprPtr b) {
  if (b->kind == Kind::Number) {
    if (b->number == 0)
      throw std::invalid_argument("quotient with literal zero denominator");
    if (a->kind == Kind::Number) return num(a->number / b->number);
    if (b->number == 1) return a;
    return mul(num(Rational(1) / b->number), a);
  }
  if (is_number(a, Rational(0))) return num(0);
  auto r = make(Kind::Div);
  r->kids = {std::move(a), std::move(b)};
  return r;
}

ExprPtr pow(ExprPtr base, ExprPtr expo) {
  if (expo->kind == Kind::Number) {
    if (expo->number == 0) return num(1);
    if (expo->number == 1) return base;
    long long n;
    if (base->kind == Kind::Number && is_int(expo->number) &&
        fits_ll(boost::multiprecision::numerator(expo->number), n) &&
        std::llabs(n) <= 64) {
      if (base->number == 0 && n < 0)
        throw std::invalid_argument("0 raised to negative power");
      Rational r(1);
      Rational b = base->number;
      long long k = std::llabs(n);
      for (long long i = 0; i < k; ++i) r *= b;
      if (n < 0) r = Rational(1) / r;
      return num(r);
    }
  }
  auto r = make(Kind::Pow);
  r->kids = {std::move(base), std::move(expo)};
  return r;
}

ExprPtr pow(ExprPtr base, long long expo) { return pow(base, num(expo)); }

ExprPtr fn(Kind k, ExprPtr arg) {
  auto r = make(k);
  r->kids = {std::move(arg)};
  return r;
}

ExprPtr fn2(Kind k, ExprPtr a, ExprPtr b) {
  auto r = make(k);
  r->kids = {std::move(a), std::move(b)};
  return r;
}

ExprPtr quad(const std::string& dummy, ExprPtr integrand, ExprPtr lower,
             ExprPtr upper) {
  auto r = make(Kind::Quad);
  r->name = dummy;
  r->kids = {std::move(integrand), std::move(lower), std::move(upper)};
  return r;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  if (a->kind == Kind::Number) return a->number == b->number;
  if (a->name != b->name) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (!structurally_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

bool contains_kind(const ExprPtr& e, Kind k) {
  if (e->kind == k) return true;
  for (auto& c : e->kids)
    if (contains_kind(c, k)) return true;
  return false;
}

bool contains_unsupported(const ExprPtr& e) {
  switch (e->kind) {
    case Kind::BesselJ:
    case Kind::BesselY:
    case Kind::ParCylU:
    case Kind::ParCylV:
    case Kind::ParCylW:
      return true;
    default:
      break;
  }
  for (auto& c : e->kids)
    if (contains_unsupported(c)) return true;
  return false;
}

bool contains_free_name(const ExprPtr& e, const std::string& n) {
  if ((e->kind == Kind::Param || e->kind == Kind::Var) && e->name == n)
    return true;
  if (e->kind == Kind::Quad) {
    if (e->name == n)  // dummy shadows the name inside the integrand
      return contains_free_name(e->kids[1], n) ||
             contains_free_name(e->kids[2], n);
    // fall through: integrand occurrences of other names are free
  }
  for (auto& c : e->kids)
    if (contains_free_name(c, n)) return true;
  return false;
}

void free_names(const ExprPtr& e, std::set<std::string>& out) {
  if (e->kind == Kind::Param || e->kind == Kind::Var) {
    out.insert(e->name);
    return;
  }
  if (e->kind == Kind::Quad) {
    std::set<std::string> inner;
    free_names(e->kids[0], inner);
    inner.erase(e->name);
    out.insert(inner.begin(), inner.end());
    free_names(e->kids[1], out);
    free_names(e->kids[2], out);
    return;
  }
  for (auto& c : e->kids) free_names(c, out);
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& m) {
  if (m.empty()) return e;
  switch (e->kind) {
    case Kind::Param:
    case Kind::Var: {
      auto it = m.find(e->name);
      return it == m.end() ? e : it->second;
    }
    case Kind::Number:
    case Kind::ConstPi:
    case Kind::ConstEuler:
      return e;
    case Kind::Quad: {
      // dummy is bound inside the integrand
      std::map<std::string, ExprPtr> inner = m;
      inner.erase(e->name);
      std::string dummy = e->name;
      ExprPtr integ = e->kids[0];
      // capture avoidance: rename dummy if a replacement mentions it
      bool capture = false;
      for (auto& kv : inner)
        if (contains_free_name(kv.second, dummy)) capture = true;
      if (capture) {
        std::string fresh = dummy;
        auto clashes = [&](const std::string& nm) {
          if (inner.count(nm)) return true;
          for (auto& kv : inner)
            if (contains_free_name(kv.second, nm)) return true;
          return contains_free_name(integ, nm);
        };
        do fresh += "_";
        while (clashes(fresh));
        integ = substitute(integ, {{dummy, var(fresh)}});
        dummy = fresh;
      }
      ExprPtr ni = inner.empty() ? integ : substitute(integ, inner);
      ExprPtr nl = substitute(e->kids[1], m);
      ExprPtr nu = substitute(e->kids[2], m);
      return quad(dummy, ni, nl, nu);
    }
    default: {
      std::vector<ExprPtr> ks;
      ks.reserve(e->kids.size());
      bool changed = false;
      for (auto& c : e->kids) {
        auto nc = substitute(c, m);
        changed = changed || nc.get() != c.get();
        ks.push_back(nc);
      }
      if (!changed) return e;
      // rebuild through the folding constructors
      switch (e->kind) {
        case Kind::Neg: return neg(ks[0]);
        case Kind::Add: return add(std::move(ks));
        case Kind::Mul: return mul(std::move(ks));
        case Kind::Div: return div(ks[0], ks[1]);
        case Kind::Pow: return pow(ks[0], ks[1]);
        default:
          if (ks.size() == 1) return fn(e->kind, ks[0]);
          return fn2(e->kind, ks[0], ks[1]);
      }
    }
  }
}

ExprPtr differentiate(const ExprPtr& e, const std::string& v) {
  switch (e->kind) {
    case Kind::Number:
    case Kind::ConstPi:
    case Kind::ConstEuler:
      return num(0);
    case Kind::Param:
    case Kind::Var:
      return num(e->name == v ? 1 : 0);
    case Kind::Neg:
      return neg(differentiate(e->kids[0], v));
    case Kind::Add: {
      std::vector<ExprPtr> ts;
      for (auto& k : e->kids) ts.push_back(differentiate(k, v));
      return add(std::move(ts));
    }
    case Kind::Mul: {
      std::vector<ExprPtr> ts;
      for (size_t i = 0; i < e->kids.size(); ++i) {
        std::vector<ExprPtr> fs;
        for (size_t j = 0; j < e->kids.size(); ++j)
          fs.push_back(i == j ? differentiate(e->kids[j], v) : e->kids[j]);
        ts.push_back(mul(std::move(fs)));
      }
      return add(std::move(ts));
    }
    case Kind::Div: {
      auto &a = e->kids[0], &b = e->kids[1];
      auto da = differentiate(a, v), db = differentiate(b, v);
      if (is_number(db, Rational(0))) return div(da, b);
      return div(sub(mul(da, b), mul(a, db)), pow(b, 2));
    }
    case Kind::Pow: {
      auto &b = e->kids[0], &p = e->kids[1];
      auto db = differentiate(b, v), dp = differentiate(p, v);
      if (is_number(dp, Rational(0))) {
        // p * b^(p-1) * b'
        return mul(p, pow(b, sub(p, num(1))), db);
      }
      // b^p * (p' ln b + p b'/b)
      return mul(e, add(mul(dp, fn(Kind::Ln, b)), div(mul(p, db), b)));
    }
    case Kind::Abs:
      return mul(fn(Kind::Sign, e->kids[0]), differentiate(e->kids[0], v));
    case Kind::Sign:
      return num(0);
    case Kind::Exp:
      return mul(e, differentiate(e->kids[0], v));
    case Kind::Ln:
      return div(differentiate(e->kids[0], v), e->kids[0]);
    case Kind::Sqrt:
      return div(differentiate(e->kids[0], v), mul(num(2), e));
    case Kind::Sin:
      return mul(fn(Kind::Cos, e->kids[0]), differentiate(e->kids[0], v));
    case Kind::Cos:
      return neg(mul(fn(Kind::Sin, e->kids[0]), differentiate(e->kids[0], v)));
    case Kind::Tan:
      return div(differentiate(e->kids[0], v), pow(fn(Kind::Cos, e->kids[0]), 2));
    case Kind::Asin:
      return div(differentiate(e->kids[0], v),
                 fn(Kind::Sqrt, sub(num(1), pow(e->kids[0], 2))));
    case Kind::Acos:
      return neg(div(differentiate(e->kids[0], v),
                     fn(Kind::Sqrt, sub(num(1), pow(e->kids[0], 2)))));
    case Kind::Atan:
      return div(differentiate(e->kids[0], v),
                 add(num(1), pow(e->kids[0], 2)));
    case Kind::Sinh:
      return mul(fn(Kind::Cosh, e->kids[0]), differentiate(e->kids[0], v));
    case Kind::Cosh:
      return mul(fn(Kind::Sinh, e->kids[0]), differentiate(e->kids[0], v));
    case Kind::Tanh:
      return div(differentiate(e->kids[0], v), pow(fn(Kind::Cosh, e->kids[0]), 2));
    case Kind::Erf:
      return mul(div(num(2), fn(Kind::Sqrt, pi())),
                 fn(Kind::Exp, neg(pow(e->kids[0], 2))),
                 differentiate(e->kids[0], v));
    case Kind::LambertW: {
      // W'(z) = W(z) / (z (1 + W(z)))
      auto dz = differentiate(e->kids[0], v);
      return div(mul(e, dz), mul(e->kids[0], add(num(1), e)));
    }
    case Kind::ExpInt1: {
      // E1'(z) = -e^{-z}/z
      auto dz = differentiate(e->kids[0], v);
      return neg(div(mul(fn(Kind::Exp, neg(e->kids[0])), dz), e->kids[0]));
    }
    case Kind::BesselJ:
    case Kind::BesselY: {
      if (!is_number(differentiate(e->kids[0], v), Rational(0)))
        throw std::invalid_argument("bessel order must not depend on variables");
      auto nu = e->kids[0];
      auto z = e->kids[1];
      auto dz = differentiate(z, v);
      // C_nu'(z) = (C_{nu-1}(z) - C_{nu+1}(z)) / 2
      return mul(num(1, 2),
                 sub(fn2(e->kind, sub(nu, num(1)), z),
                     fn2(e->kind, add(nu, num(1)), z)),
                 dz);
    }
    case Kind::ParCylU:
    case Kind::ParCylV:
    case Kind::ParCylW:
      throw UnsupportedSpecialFunction(
          "cannot differentiate an unsupported special function");
    case Kind::Quad: {
      const std::string& dummy = e->name;
      auto &g = e->kids[0], &lo = e->kids[1], &up = e->kids[2];
      std::vector<ExprPtr> parts;
      auto dup = differentiate(up, v);
      if (!is_number(dup, Rational(0)))
        parts.push_back(mul(substitute(g, {{dummy, up}}), dup));
      auto dlo = differentiate(lo, v);
      if (!is_number(dlo, Rational(0)))
        parts.push_back(neg(mul(substitute(g, {{dummy, lo}}), dlo)));
      if (v != dummy && contains_free_name(g, v)) {
        auto dg = differentiate(g, v);
        if (!is_number(dg, Rational(0)))
          parts.push_back(quad(dummy, dg, lo, up));
      }
      return add(std::move(parts));
    }
  }
  throw std::logic_error("unhandled node kind in differentiate");
}

}  // namespace dcx
