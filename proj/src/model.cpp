#include "dcx/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "dcx/parse.hpp"

namespace dcx {

namespace {

struct Section {
  std::string type;
  int line = 0;
  std::vector<std::tuple<std::string, std::string, int>> entries;  // key, value, line

  const std::string* find(const std::string& key) const {
    for (auto& [k, v, l] : entries)
      if (k == key) return &v;
    return nullptr;
  }
  std::vector<std::string> all(const std::string& key) const {
    std::vector<std::string> out;
    for (auto& [k, v, l] : entries)
      if (k == key) out.push_back(v);
    return out;
  }
};

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
  throw CatalogError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<Section> read_sections(const std::string& text,
                                   const std::string& origin) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::string pending;
  int pending_line = 0;
  auto flush_pending = [&]() {
    if (pending.empty()) return;
    std::string line = trim(pending);
    pending.clear();
    if (line.empty()) return;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(origin, pending_line, "malformed section header");
      Section s;
      s.type = trim(line.substr(1, line.size() - 2));
      s.line = pending_line;
      sections.push_back(std::move(s));
      return;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(origin, pending_line, "expected 'key = value'");
    if (sections.empty())
      fail(origin, pending_line, "key outside of any section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    sections.back().entries.emplace_back(key, value, pending_line);
  };

  while (std::getline(in, raw)) {
    ++lineno;
    // strip comments: a '#' begins a comment
    size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string line = trim(raw);
    if (line.empty()) {
      flush_pending();
      continue;
    }
    if (!pending.empty()) {
      pending += " " + line;
    } else {
      pending = line;
      pending_line = lineno;
    }
    if (pending.back() == '\\') {
      pending.pop_back();
      continue;  // continuation
    }
    flush_pending();
  }
  flush_pending();
  return sections;
}

ExprPtr parse_expr_at(const std::string& origin, int line,
                      const std::string& text) {
  try {
    return parse(text);
  } catch (const ParseError& e) {
    fail(origin, line, std::string("expression error: ") + e.what() + " in '" +
                           text + "'");
  } catch (const std::exception& e) {
    fail(origin, line, std::string("expression error: ") + e.what());
  }
}

double parse_const(const std::string& origin, int line,
                   const std::string& text) {
  auto e = parse_expr_at(origin, line, text);
  EvalContext ctx;
  try {
    return evaluate(e, ctx);
  } catch (const std::exception& ex) {
    fail(origin, line, "constraint value is not a constant: " + text);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(' || c == '{' || c == '[') ++depth;
    if (c == ')' || c == '}' || c == ']') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

// "mu in (0.3, 2)" | "eps in {-1, 1}" | "mu not in {-1}"
void parse_constraint(const std::string& origin, int line,
                      const std::string& text,
                      std::vector<ParamConstraint>& out) {
  static const std::regex rx_interval(R"(^(\w+)\s+in\s+\(([^,]+),([^)]+)\)$)");
  static const std::regex rx_set(R"(^(\w+)\s+in\s+\{([^}]*)\}$)");
  static const std::regex rx_not(R"(^(\w+)\s+not\s+in\s+\{([^}]*)\}$)");
  std::smatch m;
  auto find = [&](const std::string& name) -> ParamConstraint& {
    for (auto& c : out)
      if (c.name == name) return c;
    out.push_back(ParamConstraint{});
    out.back().name = name;
    return out.back();
  };
  if (std::regex_match(text, m, rx_interval)) {
    auto& c = find(m[1]);
    c.discrete = false;
    c.lo = parse_const(origin, line, m[2]);
    c.hi = parse_const(origin, line, m[3]);
    if (!(c.lo < c.hi)) fail(origin, line, "empty interval in constraint");
    return;
  }
  if (std::regex_match(text, m, rx_set)) {
    auto& c = find(m[1]);
    c.discrete = true;
    c.choices.clear();
    for (auto& v : split(m[2], ','))
      c.choices.push_back(parse_const(origin, line, v));
    if (c.choices.empty()) fail(origin, line, "empty choice set");
    return;
  }
  if (std::regex_match(text, m, rx_not)) {
    auto& c = find(m[1]);
    for (auto& v : split(m[2], ','))
      c.excluded.push_back(parse_const(origin, line, v));
    return;
  }
  fail(origin, line, "malformed constraint '" + text + "'");
}

DomainSpec parse_domain(const std::string& origin, int line,
                        const std::string& text) {
  DomainSpec d;
  static const std::regex rx_box(R"(^(\w+)\s+in\s+\(([^,]+),([^)]+)\)$)");
  for (auto& piece : split(text, ';')) {
    std::smatch m;
    if (!std::regex_match(piece, m, rx_box))
      fail(origin, line, "malformed domain piece '" + piece + "'");
    Interval iv;
    iv.lo = parse_const(origin, line, m[2]);
    iv.hi = parse_const(origin, line, m[3]);
    if (!(iv.lo < iv.hi)) fail(origin, line, "empty domain interval");
    d.box.emplace_back(m[1], iv);
  }
  return d;
}

bool syntactically_nonneg(const ExprPtr& e,
                          const std::set<std::string>& positive) {
  switch (e->kind) {
    case Kind::Abs:
    case Kind::Exp:
    case Kind::Sqrt:
    case Kind::Cosh:
    case Kind::ConstPi:
    case Kind::ConstEuler:
      return true;
    case Kind::Number:
      return e->number >= 0;
    case Kind::Param:
    case Kind::Var:
      return positive.count(e->name) > 0;
    case Kind::Pow: {
      if (syntactically_nonneg(e->kids[0], positive)) return true;
      const auto& p = e->kids[1];
      if (p->kind == Kind::Number &&
          boost::multiprecision::denominator(p->number) == 1 &&
          boost::multiprecision::numerator(p->number) % 2 == 0)
        return true;
      return false;
    }
    case Kind::Mul:
    case Kind::Add:
    case Kind::Div: {
      for (auto& k : e->kids)
        if (!syntactically_nonneg(k, positive)) return false;
      return true;
    }
    default:
      return false;
  }
}

// Names whose positivity follows from an interval constraint or a domain box.
std::set<std::string> positive_names(const std::vector<ParamConstraint>& params,
                                     const DomainSpec& dom) {
  std::set<std::string> out;
  for (auto& c : params) {
    if (c.discrete) {
      bool allpos = !c.choices.empty();
      for (double v : c.choices) allpos = allpos && v >= 0;
      if (allpos) out.insert(c.name);
    } else if (c.lo >= 0) {
      out.insert(c.name);
    }
  }
  for (auto& [name, iv] : dom.box)
    if (iv.lo >= 0) out.insert(name);
  return out;
}

// The catalog convention mirrors |u|^mu: fractional powers must have a base
// that is nonnegative syntactically or by declared constraints.
void check_powers(const std::string& origin, int line, const std::string& id,
                  const ExprPtr& e, const std::set<std::string>& positive) {
  if (e->kind == Kind::Pow) {
    const auto& p = e->kids[1];
    bool integral = p->kind == Kind::Number &&
                    boost::multiprecision::denominator(p->number) == 1;
    if (!integral && !syntactically_nonneg(e->kids[0], positive))
      fail(origin, line,
           "record '" + id +
               "': non-integer power of a sign-indefinite base; wrap it in "
               "abs(...)");
  }
  for (auto& k : e->kids) check_powers(origin, line, id, k, positive);
}

void check_citation(const std::string& origin, int line,
                    const std::string& id, const std::string& c) {
  static const std::regex rx(R"(^(§.+|Table .+|Eq\. .+)$)");
  if (!std::regex_match(c, rx))
    fail(origin, line,
         "record '" + id + "': citation must match §.. | Table .. | Eq. ..");
}

ExpectedStatus parse_expected(const std::string& origin, int line,
                              const std::string& v) {
  if (v == "verified") return ExpectedStatus::Verified;
  if (v == "skipped-special") return ExpectedStatus::SkippedSpecial;
  if (v == "known-discrepancy") return ExpectedStatus::KnownDiscrepancy;
  fail(origin, line, "unknown expected status '" + v + "'");
}

struct Builder {
  const std::string& origin;
  Catalog cat;
  std::set<std::string> ids;

  explicit Builder(const std::string& o) : origin(o) {}

  std::string req(const Section& s, const std::string& key) {
    const std::string* v = s.find(key);
    if (!v)
      fail(origin, s.line, "[" + s.type + "] section missing key '" + key + "'");
    return *v;
  }

  std::string opt(const Section& s, const std::string& key,
                  const std::string& dflt = "") {
    const std::string* v = s.find(key);
    return v ? *v : dflt;
  }

  ExprPtr expr_field(const Section& s, const std::string& key) {
    return parse_expr_at(origin, s.line, req(s, key));
  }

  ExprPtr expr_opt(const Section& s, const std::string& key, ExprPtr dflt) {
    const std::string* v = s.find(key);
    return v ? parse_expr_at(origin, s.line, *v) : dflt;
  }

  void common(const Section& s, std::string& id,
              std::vector<ParamConstraint>& params, DomainSpec& dom,
              std::string& citation, std::string& notes) {
    id = req(s, "id");
    if (!ids.insert(id).second) fail(origin, s.line, "duplicate id '" + id + "'");
    for (auto& p : s.all("param"))
      for (auto& piece : split(p, ';')) parse_constraint(origin, s.line, piece, params);
    if (const std::string* d = s.find("domain")) dom = parse_domain(origin, s.line, *d);
    for (auto& r : s.all("require"))
      dom.require_positive.push_back(parse_expr_at(origin, s.line, r));
    citation = req(s, "citation");
    check_citation(origin, s.line, id, citation);
    notes = opt(s, "notes");
  }
};

void ensure_declared(const std::string& origin, int line,
                     const std::string& id, const ExprPtr& e,
                     const std::set<std::string>& allowed_vars,
                     const std::vector<ParamConstraint>& params) {
  std::set<std::string> names;
  free_names(e, names);
  for (auto& n : names) {
    if (allowed_vars.count(n)) continue;
    bool declared = false;
    for (auto& c : params)
      if (c.name == n) declared = true;
    if (!declared)
      fail(origin, line,
           "record '" + id + "': parameter '" + n +
               "' has no constraint (declare with 'param = " + n +
               " in (a,b)')");
  }
}

}  // namespace

std::vector<ParamConstraint> merge_constraints(
    const std::vector<ParamConstraint>& base,
    const std::vector<ParamConstraint>& overrides) {
  std::vector<ParamConstraint> out = overrides;
  for (auto& c : base) {
    bool shadowed = false;
    for (auto& o : overrides)
      if (o.name == c.name) shadowed = true;
    if (!shadowed) out.push_back(c);
  }
  std::sort(out.begin(), out.end(),
            [](const ParamConstraint& a, const ParamConstraint& b) {
              return a.name < b.name;
            });
  return out;
}

std::map<std::string, double> draw_parameters(
    const std::vector<ParamConstraint>& constraints, uint64_t seed,
    const std::string& label, uint64_t index) {
  std::map<std::string, double> out;
  for (auto& c : constraints) {
    SplitMix64 rng = substream(seed, label + "/" + c.name, index);
    if (c.discrete) {
      std::vector<double> ok;
      for (double v : c.choices) {
        bool excluded = false;
        for (double e : c.excluded)
          if (v == e) excluded = true;
        if (!excluded) ok.push_back(v);
      }
      if (ok.empty())
        throw CatalogError("unsatisfiable constraints for '" + c.name + "'");
      out[c.name] = ok[rng.below(ok.size())];
      continue;
    }
    bool found = false;
    for (int attempt = 0; attempt < 200 && !found; ++attempt) {
      double v = rng.unif(c.lo, c.hi);
      bool clear = true;
      for (double e : c.excluded)
        if (std::abs(v - e) < 0.05) clear = false;
      if (clear) {
        out[c.name] = v;
        found = true;
      }
    }
    if (!found)
      throw CatalogError("unsatisfiable constraints for '" + c.name + "'");
  }
  return out;
}

std::string to_string(ExpectedStatus s) {
  switch (s) {
    case ExpectedStatus::Verified: return "verified";
    case ExpectedStatus::SkippedSpecial: return "skipped-special";
    case ExpectedStatus::KnownDiscrepancy: return "known-discrepancy";
  }
  return "?";
}

std::vector<ExprPtr> forall_A_instances() {
  return {parse("abs(u)^(7/10)"), parse("exp(u)"), parse("1 + u^2")};
}

const EquationSpec& Catalog::equation(const std::string& id) const {
  for (auto& e : equations)
    if (e.id == id) return e;
  throw CatalogError("dangling reference: no equation '" + id + "'");
}
const SolutionEntry& Catalog::solution(const std::string& id) const {
  for (auto& s : solutions)
    if (s.id == id) return s;
  throw CatalogError("dangling reference: no solution '" + id + "'");
}
const PointTransformSpec& Catalog::transform(const std::string& id) const {
  for (auto& s : transforms)
    if (s.id == id) return s;
  throw CatalogError("dangling reference: no transform '" + id + "'");
}
const ReductionRow& Catalog::reduction(const std::string& id) const {
  for (auto& s : reductions)
    if (s.id == id) return s;
  throw CatalogError("dangling reference: no reduction row '" + id + "'");
}

namespace {

void validate(const std::string& origin, Catalog& cat) {
  auto eq_exists = [&](const std::string& id) {
    for (auto& e : cat.equations)
      if (e.id == id) return true;
    return false;
  };
  auto sol_exists = [&](const std::string& id) {
    for (auto& s : cat.solutions)
      if (s.id == id) return true;
    return false;
  };

  for (auto& eq : cat.equations) {
    // f*g*A must not vanish identically under admissible draws
    if (eq.forall_A) continue;
    for (uint64_t d = 0; d < 3; ++d) {
      auto vals = draw_parameters(eq.params, 20240501 + d, eq.id, d);
      EvalContext ctx;
      ctx.values = vals;
      bool nonzero = false;
      SplitMix64 rng = substream(7, "fgA/" + eq.id, d);
      const Interval* tb = eq.domain.find("t");
      const Interval* xb = eq.domain.find(eq.spatial);
      const Interval* ub = eq.domain.find("u");
      for (int i = 0; i < 12 && !nonzero; ++i) {
        ctx.values["t"] = tb ? rng.unif(tb->lo, tb->hi) : rng.unif(0.3, 1.5);
        ctx.values[eq.spatial] = xb ? rng.unif(xb->lo, xb->hi) : rng.unif(0.4, 2.0);
        ctx.values["u"] = ub ? rng.unif(ub->lo, ub->hi) : rng.unif(0.4, 2.0);
        try {
          double v = evaluate(eq.f, ctx) * evaluate(eq.g, ctx) *
                     evaluate(eq.A, ctx);
          if (std::abs(v) > 1e-10) nonzero = true;
        } catch (const std::exception&) {
        }
      }
      if (!nonzero)
        throw CatalogError(origin + ": equation '" + eq.id +
                           "' violates f*g*A != 0");
    }
  }

  for (auto& s : cat.solutions) {
    if (!eq_exists(s.equation))
      throw CatalogError(origin + ": solution '" + s.id +
                         "' references unknown equation '" + s.equation + "'");
    const EquationSpec& eq = [&]() -> const EquationSpec& {
      return cat.equation(s.equation);
    }();
    ExprPtr main_expr = s.form == SolForm::Explicit ? s.U
                        : s.form == SolForm::Implicit ? s.F
                                                      : add(s.PX, s.PU);
    bool unsupported = contains_unsupported(main_expr);
    if (unsupported != (s.expected == ExpectedStatus::SkippedSpecial))
      throw CatalogError(origin + ": solution '" + s.id +
                         "': expected_status must be skipped-special exactly "
                         "when the expression uses an unsupported function");
    if (s.form == SolForm::Explicit && contains_free_name(s.U, "u"))
      throw CatalogError(origin + ": explicit solution '" + s.id +
                         "' must not reference u");
    if (s.form == SolForm::Implicit && !contains_free_name(s.F, "u"))
      throw CatalogError(origin + ": implicit solution '" + s.id +
                         "' must reference u");
    if (s.form == SolForm::Parametric && !contains_free_name(s.PX, "xi"))
      throw CatalogError(origin + ": parametric solution '" + s.id +
                         "' must reference xi in X");
    (void)eq;
  }

  for (auto& v : cat.vectorfields) {
    if (!eq_exists(v.equation))
      throw CatalogError(origin + ": vectorfield '" + v.id +
                         "' references unknown equation '" + v.equation + "'");
    if (is_number(v.tau, Rational(0)) && is_number(v.xi, Rational(0)) &&
        is_number(v.eta, Rational(0)))
      throw CatalogError(origin + ": vectorfield '" + v.id + "' is zero");
  }

  for (auto& tr : cat.transforms) {
    if (!eq_exists(tr.source) || !eq_exists(tr.target))
      throw CatalogError(origin + ": transform '" + tr.id +
                         "' references an unknown equation");
    if (!tr.push_src.empty() && !sol_exists(tr.push_src))
      throw CatalogError(origin + ": transform '" + tr.id +
                         "' push_src references unknown solution");
    if (!tr.push_tgt.empty() && !sol_exists(tr.push_tgt))
      throw CatalogError(origin + ": transform '" + tr.id +
                         "' push_tgt references unknown solution");
    if (contains_free_name(tr.fwd_t, "u") || contains_free_name(tr.fwd_x, "u"))
      throw CatalogError(origin + ": transform '" + tr.id +
                         "' must be fibre-preserving (t,x maps free of u)");
  }

  for (auto& rr : cat.reductions) {
    if (!eq_exists(rr.equation))
      throw CatalogError(origin + ": reduction '" + rr.id +
                         "' references unknown equation '" + rr.equation + "'");
    std::set<std::string> names;
    free_names(rr.omega, names);
    if (!names.count("t") && !names.count("x") && !names.count("r"))
      throw CatalogError(origin + ": reduction '" + rr.id +
                         "': omega must be non-constant");
    if (rr.mode == ReductionMode::Multiplier &&
        !contains_free_name(rr.ansatz, "phi"))
      throw CatalogError(origin + ": reduction '" + rr.id +
                         "': ansatz must depend on phi");
  }

  for (auto& fa : cat.ansatz_systems) {
    if (!eq_exists(fa.equation))
      throw CatalogError(origin + ": ansatz-system '" + fa.id +
                         "' references unknown equation");
    for (auto& fname : fa.functions)
      if (!fa.system.count(fname))
        throw CatalogError(origin + ": ansatz-system '" + fa.id +
                           "' missing d_" + fname);
  }

  for (auto& nr : cat.nonlocal_rules) {
    if (!eq_exists(nr.equation) || !eq_exists(nr.target))
      throw CatalogError(origin + ": nonlocal rule '" + nr.id +
                         "' references an unknown equation");
    if (!sol_exists(nr.seed_solution))
      throw CatalogError(origin + ": nonlocal rule '" + nr.id +
                         "' seed references unknown solution");
    if (!contains_free_name(nr.rule, "ut") && !contains_free_name(nr.rule, "ux"))
      throw CatalogError(origin + ": nonlocal rule '" + nr.id +
                         "' must reference ut or ux (otherwise it is a point rule)");
  }

  for (auto& hp : cat.hodograph_pairs) {
    if (!sol_exists(hp.source_sol) || !sol_exists(hp.target_sol))
      throw CatalogError(origin + ": hodograph pair '" + hp.id +
                         "' references unknown solutions");
  }
}

}  // namespace

Catalog load_catalog_text(const std::string& text, const std::string& origin) {
  Builder b(origin);
  auto sections = read_sections(text, origin);

  const std::set<std::string> eq_xt = {"t", "x", "r"};
  const std::set<std::string> only_u = {"u"};
  const std::set<std::string> txu = {"t", "x", "r", "u"};

  for (auto& s : sections) {
    if (s.type == "equation") {
      EquationSpec eq;
      eq.spatial = b.opt(s, "spatial", "x");
      std::string ignored_cit, ignored_notes;
      b.common(s, eq.id, eq.params, eq.domain, eq.citation, eq.notes);
      std::string atext = b.req(s, "A");
      if (atext == "forall") {
        eq.forall_A = true;
        eq.A = parse("1");
      } else {
        eq.A = parse_expr_at(origin, s.line, atext);
      }
      eq.f = b.expr_field(s, "f");
      eq.g = b.expr_field(s, "g");
      eq.h = b.expr_field(s, "h");
      eq.B = b.expr_field(s, "B");
      eq.reaction = b.expr_opt(s, "reaction", nullptr);
      auto eqpos = positive_names(eq.params, eq.domain);
      for (const ExprPtr* e : {&eq.f, &eq.g, &eq.h}) {
        ensure_declared(origin, s.line, eq.id, *e, eq_xt, eq.params);
        check_powers(origin, s.line, eq.id, *e, eqpos);
      }
      for (const ExprPtr* e : {&eq.A, &eq.B}) {
        ensure_declared(origin, s.line, eq.id, *e, only_u, eq.params);
        check_powers(origin, s.line, eq.id, *e, eqpos);
      }
      if (eq.reaction) {
        ensure_declared(origin, s.line, eq.id, eq.reaction, txu, eq.params);
        check_powers(origin, s.line, eq.id, eq.reaction, eqpos);
      }
      b.cat.equations.push_back(std::move(eq));
    } else if (s.type == "solution") {
      SolutionEntry sol;
      b.common(s, sol.id, sol.params, sol.domain, sol.citation, sol.notes);
      sol.equation = b.req(s, "equation");
      std::string form = b.opt(s, "form", "explicit");
      const EquationSpec* eq = nullptr;
      for (auto& e : b.cat.equations)
        if (e.id == sol.equation) eq = &e;
      if (!eq)
        fail(origin, s.line,
             "solution '" + sol.id + "': unknown equation '" + sol.equation +
                 "' (equations must precede their solutions)");
      std::set<std::string> tx = {"t", eq->spatial};
      std::set<std::string> txu_l = {"t", eq->spatial, "u"};
      std::set<std::string> txi = {"t", "xi"};
      auto merged = merge_constraints(eq->params, sol.params);
      auto solpos = positive_names(merged, sol.domain);
      if (form == "explicit") {
        sol.form = SolForm::Explicit;
        sol.U = b.expr_field(s, "u");
        ensure_declared(origin, s.line, sol.id, sol.U, tx, merged);
        check_powers(origin, s.line, sol.id, sol.U, solpos);
      } else if (form == "implicit" || form == "quadrature") {
        sol.form = SolForm::Implicit;
        sol.quadrature = form == "quadrature";
        sol.F = b.expr_field(s, "F");
        ensure_declared(origin, s.line, sol.id, sol.F, txu_l, merged);
        check_powers(origin, s.line, sol.id, sol.F, solpos);
      } else if (form == "parametric") {
        sol.form = SolForm::Parametric;
        sol.PX = b.expr_field(s, "X");
        sol.PU = b.expr_field(s, "U");
        ensure_declared(origin, s.line, sol.id, sol.PX, txi, merged);
        ensure_declared(origin, s.line, sol.id, sol.PU, txi, merged);
        check_powers(origin, s.line, sol.id, sol.PX, solpos);
        check_powers(origin, s.line, sol.id, sol.PU, solpos);
        sol.quadrature =
            contains_kind(sol.PX, Kind::Quad) || contains_kind(sol.PU, Kind::Quad);
      } else {
        fail(origin, s.line, "unknown solution form '" + form + "'");
      }
      sol.expected = parse_expected(origin, s.line, b.opt(s, "expected", "verified"));
      b.cat.solutions.push_back(std::move(sol));
    } else if (s.type == "vectorfield") {
      VectorFieldSpec vf;
      DomainSpec unused;
      b.common(s, vf.id, vf.params, unused, vf.citation, vf.notes);
      vf.equation = b.req(s, "equation");
      vf.tau = b.expr_field(s, "tau");
      vf.xi = b.expr_field(s, "xi");
      vf.eta = b.expr_field(s, "eta");
      const EquationSpec* eq = nullptr;
      for (auto& e : b.cat.equations)
        if (e.id == vf.equation) eq = &e;
      if (!eq) fail(origin, s.line, "vectorfield references unknown equation");
      auto merged = merge_constraints(eq->params, vf.params);
      for (const ExprPtr* e : {&vf.tau, &vf.xi, &vf.eta})
        ensure_declared(origin, s.line, vf.id, *e, txu, merged);
      b.cat.vectorfields.push_back(std::move(vf));
    } else if (s.type == "transform") {
      PointTransformSpec tr;
      b.common(s, tr.id, tr.params, tr.domain, tr.citation, tr.notes);
      tr.source = b.req(s, "source");
      tr.target = b.req(s, "target");
      tr.fwd_t = b.expr_field(s, "t");
      tr.fwd_x = b.expr_field(s, "x");
      tr.fwd_u = b.expr_field(s, "u");
      tr.inv_t = b.expr_field(s, "it");
      tr.inv_x = b.expr_field(s, "ix");
      tr.inv_u = b.expr_field(s, "iu");
      tr.push_src = b.opt(s, "push_src");
      tr.push_tgt = b.opt(s, "push_tgt");
      if (const std::string* pd = s.find("push_domain"))
        tr.push_domain = parse_domain(origin, s.line, *pd);
      if (const std::string* pm = s.find("push_match")) {
        for (auto& piece : split(*pm, ';')) {
          size_t eqpos = piece.find('=');
          if (eqpos == std::string::npos)
            fail(origin, s.line, "malformed push_match");
          tr.push_match[trim(piece.substr(0, eqpos))] =
              parse_expr_at(origin, s.line, piece.substr(eqpos + 1));
        }
      }
      tr.expected = parse_expected(origin, s.line, b.opt(s, "expected", "verified"));
      b.cat.transforms.push_back(std::move(tr));
    } else if (s.type == "reduction") {
      ReductionRow rr;
      b.common(s, rr.id, rr.params, rr.domain, rr.citation, rr.notes);
      rr.equation = b.req(s, "equation");
      rr.ansatz = b.expr_field(s, "ansatz");
      rr.omega = b.expr_field(s, "omega");
      rr.reduced = b.expr_field(s, "reduced");
      std::string mode = b.opt(s, "mode", "multiplier");
      rr.mode = mode == "family" ? ReductionMode::Family : ReductionMode::Multiplier;
      rr.phi_shift = std::stod(b.opt(s, "phi_shift", "0"));
      rr.phi_scale = std::stod(b.opt(s, "phi_scale", "1"));
      b.cat.reductions.push_back(std::move(rr));
    } else if (s.type == "ansatz-system") {
      FunctionalAnsatzRow fa;
      b.common(s, fa.id, fa.params, fa.domain, fa.citation, fa.notes);
      fa.equation = b.req(s, "equation");
      fa.arg = b.opt(s, "arg", "t");
      fa.parametric = b.opt(s, "kind", "explicit") == "parametric";
      for (auto& fname : split(b.req(s, "functions"), ' '))
        if (!fname.empty()) fa.functions.push_back(fname);
      for (auto& fname : fa.functions) {
        const std::string* rhs = s.find("d_" + fname);
        if (!rhs) fail(origin, s.line, "missing d_" + fname);
        fa.system[fname] = parse_expr_at(origin, s.line, *rhs);
        const std::string* rng = s.find("range_" + fname);
        Interval iv{0.5, 1.5};
        if (rng) {
          auto d = parse_domain(origin, s.line, fname + " in " + *rng);
          iv = d.box[0].second;
        }
        fa.draw[fname] = iv;
      }
      if (fa.parametric) {
        fa.PX = b.expr_field(s, "X");
        fa.PU = b.expr_field(s, "U");
      } else {
        fa.U = b.expr_field(s, "u");
      }
      b.cat.ansatz_systems.push_back(std::move(fa));
    } else if (s.type == "nonlocal") {
      NonlocalRuleSpec nr;
      DomainSpec dom;
      b.common(s, nr.id, nr.params, dom, nr.citation, nr.notes);
      nr.push_domain = dom;
      nr.equation = b.req(s, "equation");
      nr.target = b.opt(s, "target", nr.equation);
      nr.rule = b.expr_field(s, "v");
      nr.seed_solution = b.req(s, "seed");
      nr.expected = parse_expected(origin, s.line, b.opt(s, "expected", "verified"));
      b.cat.nonlocal_rules.push_back(std::move(nr));
    } else if (s.type == "hodograph-pair") {
      HodographPairSpec hp;
      b.common(s, hp.id, hp.params, hp.domain, hp.citation, hp.notes);
      hp.source_sol = b.req(s, "source_sol");
      hp.target_sol = b.req(s, "target_sol");
      hp.potential = b.expr_field(s, "potential");
      hp.uscale = b.expr_opt(s, "uscale", parse("1"));
      hp.argscale = b.expr_opt(s, "argscale", parse("1"));
      hp.tshift = b.expr_opt(s, "tshift", parse("0"));
      if (const std::string* tp = s.find("tparam")) {
        for (auto& piece : split(*tp, ';')) {
          size_t eqpos = piece.find('=');
          if (eqpos == std::string::npos)
            fail(origin, s.line, "malformed tparam");
          hp.target_params[trim(piece.substr(0, eqpos))] =
              parse_expr_at(origin, s.line, piece.substr(eqpos + 1));
        }
      }
      hp.expected = parse_expected(origin, s.line, b.opt(s, "expected", "verified"));
      b.cat.hodograph_pairs.push_back(std::move(hp));
    } else {
      fail(origin, s.line, "unknown section type '[" + s.type + "]'");
    }
  }

  validate(origin, b.cat);
  return std::move(b.cat);
}

Catalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot open catalog file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_catalog_text(ss.str(), path);
}

}  // namespace dcx
