#include "dcx/parse.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace dcx {

bool is_variable_name(const std::string& n) {
  return n == "t" || n == "x" || n == "u" || n == "r" || n == "w" || n == "xi";
}

namespace {

const std::map<std::string, Kind> kUnary = {
    {"exp", Kind::Exp},   {"ln", Kind::Ln},     {"sqrt", Kind::Sqrt},
    {"abs", Kind::Abs},   {"sign", Kind::Sign}, {"sin", Kind::Sin},
    {"cos", Kind::Cos},   {"tan", Kind::Tan},   {"asin", Kind::Asin},
    {"acos", Kind::Acos}, {"atan", Kind::Atan}, {"sinh", Kind::Sinh},
    {"cosh", Kind::Cosh}, {"tanh", Kind::Tanh}, {"erf", Kind::Erf},
    {"lambertw", Kind::LambertW}, {"expint1", Kind::ExpInt1}};

const std::map<std::string, Kind> kBinary = {
    {"besselj", Kind::BesselJ}, {"bessely", Kind::BesselY},
    {"parcylu", Kind::ParCylU}, {"parcylv", Kind::ParCylV},
    {"parcylw", Kind::ParCylW}};

class Parser {
public:
  explicit Parser(const std::string& s) : src_(s) {}

  ExprPtr run() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("trailing characters after expression");
    return e;
  }

private:
  const std::string& src_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(pos_, msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  ExprPtr parse_expr() {
    auto e = parse_term();
    for (;;) {
      if (eat('+'))
        e = add(e, parse_term());
      else if (eat('-'))
        e = sub(e, parse_term());
      else
        return e;
    }
  }

  ExprPtr parse_term() {
    auto e = parse_factor();
    for (;;) {
      if (eat('*'))
        e = mul(e, parse_factor());
      else if (eat('/'))
        e = make_div(e, parse_factor());
      else
        return e;
    }
  }

  ExprPtr make_div(ExprPtr a, ExprPtr b) {
    if (b->kind == Kind::Number && b->number == 0)
      fail("division by the literal constant 0");
    return div(std::move(a), std::move(b));
  }

  ExprPtr parse_factor() {
    auto b = parse_atom();
    if (eat('^')) return pow(b, parse_factor());
    return b;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '-') {
      // unary minus binds more loosely than '^': -x^2 means -(x^2)
      ++pos_;
      return neg(parse_factor());
    }
    if (c == '(') {
      ++pos_;
      auto e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_number() {
    size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    Rational value(src_.substr(start, pos_ - start).empty()
                       ? "0"
                       : src_.substr(start, pos_ - start));
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      size_t fs = pos_;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
      if (pos_ == fs && pos_ - start <= 1) fail("malformed number");
      std::string frac = src_.substr(fs, pos_ - fs);
      Rational den(1);
      for (size_t i = 0; i < frac.size(); ++i) den *= 10;
      if (!frac.empty()) value += Rational(frac) / den;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t save = pos_;
      ++pos_;
      bool negexp = false;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
        negexp = src_[pos_] == '-';
        ++pos_;
      }
      size_t ds = pos_;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
      if (pos_ == ds) {
        pos_ = save;  // 'e' belongs to an identifier-like token; back off
      } else {
        long long ex = std::stoll(src_.substr(ds, pos_ - ds));
        Rational ten(10);
        for (long long i = 0; i < ex; ++i) {
          if (negexp)
            value /= ten;
          else
            value *= ten;
        }
      }
    }
    return num(value);
  }

  ExprPtr parse_ident() {
    size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    skip_ws();
    bool call = pos_ < src_.size() && src_[pos_] == '(';
    if (!call) {
      if (name == "pi") return pi();
      if (name == "euler") return euler();
      if (is_variable_name(name)) return var(name);
      return param(name);
    }
    // function call
    ++pos_;  // '('
    std::vector<ExprPtr> args;
    std::vector<std::pair<size_t, std::string>> raw_idents;
    if (peek() != ')') {
      for (;;) {
        skip_ws();
        raw_idents.emplace_back(pos_, peek_ident());
        args.push_back(parse_expr());
        if (!eat(',')) break;
      }
    }
    if (!eat(')')) fail("expected ')' in call to '" + name + "'");

    if (auto it = kUnary.find(name); it != kUnary.end()) {
      if (args.size() != 1)
        fail("function '" + name + "' expects 1 argument, got " +
             std::to_string(args.size()));
      return fn(it->second, args[0]);
    }
    if (auto it = kBinary.find(name); it != kBinary.end()) {
      if (args.size() != 2)
        fail("function '" + name + "' expects 2 arguments, got " +
             std::to_string(args.size()));
      return fn2(it->second, args[0], args[1]);
    }
    if (name == "quad") {
      if (args.size() != 3 && args.size() != 4)
        fail("quad expects 3 or 4 arguments, got " +
             std::to_string(args.size()));
      const std::string& dummy = raw_idents[0].second;
      if (dummy.empty() || args[0]->name != dummy ||
          (args[0]->kind != Kind::Var && args[0]->kind != Kind::Param))
        throw ParseError(raw_idents[0].first,
                         "first argument of quad must be the dummy name");
      ExprPtr upper = args.size() == 4 ? args[3] : args[0];
      return quad(dummy, args[1], args[2], upper);
    }
    fail("unknown function '" + name + "'");
  }

  // Best-effort look at an identifier token (for quad's dummy slot).
  std::string peek_ident() {
    size_t p = pos_;
    std::string out;
    while (p < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[p])) ||
                               src_[p] == '_')) {
      out += src_[p];
      ++p;
    }
    return out;
  }
};

std::string rational_str(const Rational& r) {
  std::ostringstream os;
  os << boost::multiprecision::numerator(r);
  if (boost::multiprecision::denominator(r) != 1)
    os << "/" << boost::multiprecision::denominator(r);
  return os.str();
}

const char* fn_name(Kind k) {
  switch (k) {
    case Kind::Exp: return "exp";
    case Kind::Ln: return "ln";
    case Kind::Sqrt: return "sqrt";
    case Kind::Abs: return "abs";
    case Kind::Sign: return "sign";
    case Kind::Sin: return "sin";
    case Kind::Cos: return "cos";
    case Kind::Tan: return "tan";
    case Kind::Asin: return "asin";
    case Kind::Acos: return "acos";
    case Kind::Atan: return "atan";
    case Kind::Sinh: return "sinh";
    case Kind::Cosh: return "cosh";
    case Kind::Tanh: return "tanh";
    case Kind::Erf: return "erf";
    case Kind::LambertW: return "lambertw";
    case Kind::ExpInt1: return "expint1";
    case Kind::BesselJ: return "besselj";
    case Kind::BesselY: return "bessely";
    case Kind::ParCylU: return "parcylu";
    case Kind::ParCylV: return "parcylv";
    case Kind::ParCylW: return "parcylw";
    default: return nullptr;
  }
}

// Operator precedence used by the printer; higher binds tighter.
int prec(const ExprPtr& e) {
  switch (e->kind) {
    case Kind::Add: return 1;
    case Kind::Neg: return 2;
    case Kind::Mul:
    case Kind::Div: return 3;
    case Kind::Pow: return 4;
    case Kind::Number:
      return e->number < 0 ? 2
             : boost::multiprecision::denominator(e->number) != 1 ? 3
                                                                  : 9;
    default: return 9;
  }
}

void emit(const ExprPtr& e, std::ostream& os, int parent_prec) {
  int p = prec(e);
  bool parens = p < parent_prec;
  if (parens) os << "(";
  switch (e->kind) {
    case Kind::Number: os << rational_str(e->number); break;
    case Kind::ConstPi: os << "pi"; break;
    case Kind::ConstEuler: os << "euler"; break;
    case Kind::Param:
    case Kind::Var: os << e->name; break;
    case Kind::Neg:
      os << "-";
      emit(e->kids[0], os, 3);
      break;
    case Kind::Add:
      for (size_t i = 0; i < e->kids.size(); ++i) {
        const ExprPtr& k = e->kids[i];
        if (i == 0) {
          emit(k, os, 2);
        } else if (k->kind == Kind::Neg) {
          os << " - ";
          emit(k->kids[0], os, 3);
        } else if (k->kind == Kind::Number && k->number < 0) {
          os << " - " << rational_str(-k->number);
        } else if (k->kind == Kind::Mul && !k->kids.empty() &&
                   k->kids[0]->kind == Kind::Number &&
                   k->kids[0]->number < 0) {
          os << " - ";
          std::vector<ExprPtr> ks = k->kids;
          ks[0] = num(-ks[0]->number);
          emit(mul(std::move(ks)), os, 4);
        } else {
          os << " + ";
          emit(k, os, 2);
        }
      }
      break;
    case Kind::Mul:
      for (size_t i = 0; i < e->kids.size(); ++i) {
        if (i) os << "*";
        emit(e->kids[i], os, 4);
      }
      break;
    case Kind::Div:
      emit(e->kids[0], os, 3);
      os << "/";
      emit(e->kids[1], os, 4);
      break;
    case Kind::Pow:
      emit(e->kids[0], os, 5);
      os << "^";
      emit(e->kids[1], os, 4);  // right-associative
      break;
    case Kind::Quad:
      os << "quad(" << e->name << ", ";
      emit(e->kids[0], os, 0);
      os << ", ";
      emit(e->kids[1], os, 0);
      if (!((e->kids[2]->kind == Kind::Var || e->kids[2]->kind == Kind::Param) &&
            e->kids[2]->name == e->name)) {
        os << ", ";
        emit(e->kids[2], os, 0);
      }
      os << ")";
      break;
    default: {
      const char* n = fn_name(e->kind);
      os << n << "(";
      for (size_t i = 0; i < e->kids.size(); ++i) {
        if (i) os << ", ";
        emit(e->kids[i], os, 0);
      }
      os << ")";
    }
  }
  if (parens) os << ")";
}

}  // namespace

ExprPtr parse(const std::string& source) { return Parser(source).run(); }

std::string format(const ExprPtr& e) {
  std::ostringstream os;
  emit(e, os, 0);
  return os.str();
}

}  // namespace dcx
