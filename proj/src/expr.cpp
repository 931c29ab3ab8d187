#include "carnot/expr.hpp"

#include <cassert>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace carnot {

struct Expr::Node {
  Kind kind;
  double value = 0.0;  // Constant payload, or the exponent of a Pow
  int index = -1;      // Coordinate payload
  Fn fn = Fn::Sin;
  std::shared_ptr<const Node> a, b;
};

namespace {

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

double eval_fn(Expr::Fn f, double t) {
  switch (f) {
    case Expr::Fn::Sin: return std::sin(t);
    case Expr::Fn::Cos: return std::cos(t);
    case Expr::Fn::Tan: return std::tan(t);
    case Expr::Fn::Exp: return std::exp(t);
    case Expr::Fn::Log:
      if (t <= 0.0) throw DomainError("log of nonpositive value");
      return std::log(t);
    case Expr::Fn::Sqrt:
      if (t < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(t);
    case Expr::Fn::Abs: return std::fabs(t);
    case Expr::Fn::Sgn: return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
  }
  throw Error("unreachable function kind");
}

double eval_pow(double base, double e) {
  if (base < 0.0 && !is_integer(e))
    throw DomainError("pow of negative base with non-integer exponent");
  if (base == 0.0 && e < 0.0) throw DomainError("pow: zero base, negative exponent");
  return std::pow(base, e);
}

}  // namespace

Expr::Expr() : node_(std::make_shared<Node>(Node{Kind::Constant, 0.0})) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::coordinate(int index) {
  if (index < 0) throw InputError("coordinate index must be nonnegative");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Coordinate;
  n->index = index;
  return Expr(std::move(n));
}

Expr Expr::negate(Expr e) {
  if (e.is_constant()) return constant(-e.constant_value());
  if (e.kind() == Kind::Negate) return e.child(0);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->a = e.node_;
  return Expr(std::move(n));
}

Expr Expr::add(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant())
    return constant(a.constant_value() + b.constant_value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Add;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr Expr::sub(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant())
    return constant(a.constant_value() - b.constant_value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return negate(b);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sub;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr Expr::mul(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant())
    return constant(a.constant_value() * b.constant_value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Mul;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr Expr::div(Expr a, Expr b) {
  if (b.is_constant(0.0)) throw DomainError("division by constant zero");
  if (a.is_constant() && b.is_constant())
    return constant(a.constant_value() / b.constant_value());
  if (a.is_constant(0.0)) return constant(0.0);
  if (b.is_constant(1.0)) return a;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Div;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr Expr::pow(Expr base, double exponent) {
  if (!std::isfinite(exponent)) throw DomainError("pow exponent must be finite");
  if (exponent == 0.0) return constant(1.0);
  if (exponent == 1.0) return base;
  if (base.is_constant()) return constant(eval_pow(base.constant_value(), exponent));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pow;
  n->value = exponent;
  n->a = base.node_;
  return Expr(std::move(n));
}

Expr Expr::apply(Fn f, Expr arg) {
  if (arg.is_constant()) return constant(eval_fn(f, arg.constant_value()));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Func;
  n->fn = f;
  n->a = arg.node_;
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }

double Expr::constant_value() const {
  assert(node_->kind == Kind::Constant);
  return node_->value;
}

int Expr::coordinate_index() const {
  assert(node_->kind == Kind::Coordinate);
  return node_->index;
}

double Expr::exponent() const {
  assert(node_->kind == Kind::Pow);
  return node_->value;
}

Expr::Fn Expr::fn() const {
  assert(node_->kind == Kind::Func);
  return node_->fn;
}

const Expr Expr::child(int i) const {
  const auto& c = (i == 0) ? node_->a : node_->b;
  assert(c);
  return Expr(c);
}

int Expr::arity() const {
  switch (node_->kind) {
    case Kind::Constant:
    case Kind::Coordinate: return 0;
    case Kind::Negate:
    case Kind::Pow:
    case Kind::Func: return 1;
    default: return 2;
  }
}

bool Expr::is_constant(double v) const {
  return node_->kind == Kind::Constant && node_->value == v;
}

double Expr::operator()(const Eigen::VectorXd& p) const {
  const Node* n = node_.get();
  switch (n->kind) {
    case Kind::Constant: return n->value;
    case Kind::Coordinate:
      if (n->index >= p.size())
        throw InputError("point has too few coordinates for expression");
      return p[n->index];
    case Kind::Negate: return -Expr(n->a)(p);
    case Kind::Add: return Expr(n->a)(p) + Expr(n->b)(p);
    case Kind::Sub: return Expr(n->a)(p) - Expr(n->b)(p);
    case Kind::Mul: return Expr(n->a)(p) * Expr(n->b)(p);
    case Kind::Div: {
      double den = Expr(n->b)(p);
      if (den == 0.0) throw DomainError("division by zero");
      return Expr(n->a)(p) / den;
    }
    case Kind::Pow: return eval_pow(Expr(n->a)(p), n->value);
    case Kind::Func: return eval_fn(n->fn, Expr(n->a)(p));
  }
  throw Error("unreachable expression kind");
}

Expr Expr::derivative(int coord) const {
  const Node* n = node_.get();
  switch (n->kind) {
    case Kind::Constant: return constant(0.0);
    case Kind::Coordinate: return constant(n->index == coord ? 1.0 : 0.0);
    case Kind::Negate: return negate(Expr(n->a).derivative(coord));
    case Kind::Add:
      return add(Expr(n->a).derivative(coord), Expr(n->b).derivative(coord));
    case Kind::Sub:
      return sub(Expr(n->a).derivative(coord), Expr(n->b).derivative(coord));
    case Kind::Mul: {
      Expr u(n->a), v(n->b);
      return add(mul(u.derivative(coord), v), mul(u, v.derivative(coord)));
    }
    case Kind::Div: {
      Expr u(n->a), v(n->b);
      return div(sub(mul(u.derivative(coord), v), mul(u, v.derivative(coord))),
                 mul(v, v));
    }
    case Kind::Pow: {
      Expr u(n->a);
      return mul(mul(constant(n->value), pow(u, n->value - 1.0)),
                 u.derivative(coord));
    }
    case Kind::Func: {
      Expr u(n->a);
      Expr du = u.derivative(coord);
      switch (n->fn) {
        case Fn::Sin: return mul(apply(Fn::Cos, u), du);
        case Fn::Cos: return negate(mul(apply(Fn::Sin, u), du));
        case Fn::Tan: {
          Expr c = apply(Fn::Cos, u);
          return div(du, mul(c, c));
        }
        case Fn::Exp: return mul(apply(Fn::Exp, u), du);
        case Fn::Log: return div(du, u);
        case Fn::Sqrt:
          return div(du, mul(constant(2.0), apply(Fn::Sqrt, u)));
        case Fn::Abs: return mul(apply(Fn::Sgn, u), du);
        case Fn::Sgn: return constant(0.0);
      }
      throw Error("unreachable function kind");
    }
  }
  throw Error("unreachable expression kind");
}

int Expr::max_coordinate() const {
  const Node* n = node_.get();
  int m = (n->kind == Kind::Coordinate) ? n->index : -1;
  if (n->a) m = std::max(m, Expr(n->a).max_coordinate());
  if (n->b) m = std::max(m, Expr(n->b).max_coordinate());
  return m;
}

bool Expr::same_as(const Expr& other) const {
  const Node* x = node_.get();
  const Node* y = other.node_.get();
  if (x == y) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case Kind::Constant: return x->value == y->value;
    case Kind::Coordinate: return x->index == y->index;
    case Kind::Pow:
      if (x->value != y->value) return false;
      break;
    case Kind::Func:
      if (x->fn != y->fn) return false;
      break;
    default: break;
  }
  if (x->a && !Expr(x->a).same_as(Expr(y->a))) return false;
  if (x->b && !Expr(x->b).same_as(Expr(y->b))) return false;
  return true;
}

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  // Prefer the shortest form that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return std::string(buf);
  }
  return s;
}

/* Precedence levels used by the printer: binary plus/minus are 1, mul and
 * div are 2, ^ is 3, unary minus 4, atoms 5.  A child is parenthesized when
 * its own level is below the minimum the position requires, which keeps
 * printing injective with respect to tree structure. */
int level_of(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Pow: return 3;
    case Expr::Kind::Negate: return 4;
    default: return 5;
  }
}

void print(const Expr& e, std::span<const std::string> names, int min_level,
           std::string& out) {
  int lvl = level_of(e);
  bool parens = lvl < min_level;
  if (parens) out += '(';
  switch (e.kind()) {
    case Expr::Kind::Constant: {
      double v = e.constant_value();
      // Negative constants print through the unary-minus production and fold
      // back on re-parse.
      if (v < 0.0) {
        out += '-';
        out += format_number(-v);
      } else {
        out += format_number(v);
      }
      break;
    }
    case Expr::Kind::Coordinate: {
      int i = e.coordinate_index();
      if (i < static_cast<int>(names.size())) out += names[i];
      else out += "x" + std::to_string(i + 1);
      break;
    }
    case Expr::Kind::Negate:
      out += '-';
      print(e.child(0), names, 4, out);
      break;
    case Expr::Kind::Add:
      print(e.child(0), names, 1, out);
      out += " + ";
      print(e.child(1), names, 2, out);
      break;
    case Expr::Kind::Sub:
      print(e.child(0), names, 1, out);
      out += " - ";
      print(e.child(1), names, 2, out);
      break;
    case Expr::Kind::Mul:
      print(e.child(0), names, 2, out);
      out += '*';
      print(e.child(1), names, 3, out);
      break;
    case Expr::Kind::Div:
      print(e.child(0), names, 2, out);
      out += '/';
      print(e.child(1), names, 3, out);
      break;
    case Expr::Kind::Pow:
      print(e.child(0), names, 4, out);
      out += '^';
      {
        double ex = e.exponent();
        if (ex < 0.0) {
          out += "(-" + format_number(-ex) + ")";
        } else {
          out += format_number(ex);
        }
      }
      break;
    case Expr::Kind::Func:
      out += fn_name(e.fn());
      out += '(';
      print(e.child(0), names, 1, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string Expr::str(std::span<const std::string> coord_names) const {
  std::string out;
  print(*this, coord_names, 1, out);
  return out;
}

const char* fn_name(Expr::Fn f) {
  switch (f) {
    case Expr::Fn::Sin: return "sin";
    case Expr::Fn::Cos: return "cos";
    case Expr::Fn::Tan: return "tan";
    case Expr::Fn::Exp: return "exp";
    case Expr::Fn::Log: return "log";
    case Expr::Fn::Sqrt: return "sqrt";
    case Expr::Fn::Abs: return "abs";
    case Expr::Fn::Sgn: return "sgn";
  }
  return "?";
}

namespace {

struct Lexer {
  std::string_view text;
  std::size_t pos = 0;

  void skip_space() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }
  bool done() {
    skip_space();
    return pos >= text.size();
  }
  char peek() {
    skip_space();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
};

struct Parser {
  Lexer lex;
  std::span<const std::string> coords;

  Expr parse() {
    Expr e = expr();
    if (!lex.done())
      throw ParseError("unexpected trailing input", lex.pos);
    return e;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (lex.accept('+')) e = Expr::add(e, term());
      else if (lex.accept('-')) e = Expr::sub(e, term());
      else return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (lex.accept('*')) e = Expr::mul(e, factor());
      else if (lex.accept('/')) e = Expr::div(e, factor());
      else return e;
    }
  }

  Expr factor() {
    Expr e = unary();
    if (lex.accept('^')) return Expr::pow(e, exponent_constant());
    return e;
  }

  Expr unary() {
    if (lex.accept('-')) return Expr::negate(unary());
    return atom();
  }

  /* Exponents must reduce to a constant: a number with optional sign, or a
   * parenthesized expression that folds to one. */
  double exponent_constant() {
    lex.skip_space();
    std::size_t at = lex.pos;
    if (lex.accept('(')) {
      Expr inner = expr();
      if (!lex.accept(')')) throw ParseError("expected ')'", lex.pos);
      if (!inner.is_constant())
        throw ParseError("pow with non-constant exponent", at);
      return inner.constant_value();
    }
    bool neg = lex.accept('-');
    char c = lex.peek();
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.'))
      throw ParseError("pow with non-constant exponent", at);
    double v = number();
    return neg ? -v : v;
  }

  double number() {
    lex.skip_space();
    std::size_t start = lex.pos;
    const std::string_view t = lex.text;
    std::size_t i = start;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i < t.size() && t[i] == '.') {
      ++i;
      while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    }
    if (i == start || (i == start + 1 && t[start] == '.'))
      throw ParseError("expected a number", start);
    if (i < t.size() && (t[i] == 'e' || t[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < t.size() && (t[j] == '+' || t[j] == '-')) ++j;
      std::size_t d = j;
      while (d < t.size() && std::isdigit(static_cast<unsigned char>(t[d]))) ++d;
      if (d > j) i = d;  // otherwise the 'e' belongs to an identifier after
    }
    std::string token(t.substr(start, i - start));
    lex.pos = i;
    return std::strtod(token.c_str(), nullptr);
  }

  Expr atom() {
    char c = lex.peek();
    std::size_t at = lex.pos;
    if (c == '(') {
      lex.accept('(');
      Expr e = expr();
      if (!lex.accept(')')) throw ParseError("expected ')'", lex.pos);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return Expr::constant(number());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name = identifier();
      if (lex.peek() == '(') {
        Expr::Fn f;
        if (!function_named(name, f))
          throw ParseError("unknown function \"" + name + "\"", at);
        lex.accept('(');
        Expr arg = expr();
        if (!lex.accept(')')) throw ParseError("expected ')'", lex.pos);
        return Expr::apply(f, arg);
      }
      for (std::size_t i = 0; i < coords.size(); ++i)
        if (coords[i] == name) return Expr::coordinate(static_cast<int>(i));
      throw ParseError("unknown identifier \"" + name + "\"", at);
    }
    if (c == '\0') throw ParseError("unexpected end of input", lex.pos);
    throw ParseError(std::string("unexpected character '") + c + "'", lex.pos);
  }

  std::string identifier() {
    lex.skip_space();
    std::size_t start = lex.pos;
    const std::string_view t = lex.text;
    std::size_t i = start;
    while (i < t.size() &&
           (std::isalnum(static_cast<unsigned char>(t[i])) || t[i] == '_'))
      ++i;
    lex.pos = i;
    return std::string(t.substr(start, i - start));
  }

  static bool function_named(const std::string& name, Expr::Fn& out) {
    static const std::map<std::string, Expr::Fn> table = {
        {"sin", Expr::Fn::Sin}, {"cos", Expr::Fn::Cos}, {"tan", Expr::Fn::Tan},
        {"exp", Expr::Fn::Exp}, {"log", Expr::Fn::Log}, {"sqrt", Expr::Fn::Sqrt},
        {"abs", Expr::Fn::Abs}, {"sgn", Expr::Fn::Sgn}};
    auto it = table.find(name);
    if (it == table.end()) return false;
    out = it->second;
    return true;
  }
};

}  // namespace

Expr parse_expr(std::string_view text, std::span<const std::string> coords) {
  Parser p{Lexer{text}, coords};
  return p.parse();
}

}  // namespace carnot
