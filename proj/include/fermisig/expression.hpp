#pragma once

// Small expression grammar over the variables t and x, used for conformal
// factors and boundary curves in domain spec files. Supports evaluation,
// symbolic differentiation and a canonical printer whose output reparses to
// the identical tree.
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?          right associative
//   atom  := number | 't' | 'x' | 'pi' | fn '(' expr (',' expr)? ')' | '(' expr ')'

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fermisig/constants.hpp"
#include "fermisig/errors.hpp"

namespace fermisig {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
 public:
  enum class Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Fn { Sin, Cos, Exp, Log, Sqrt, Abs, Min, Max };

  Kind kind;
  double value = 0.0;      // Const
  char var = 't';          // Var
  Fn fn = Fn::Sin;         // Call
  ExprPtr a, b;            // children

  static ExprPtr constant(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Const;
    e->value = v;
    return e;
  }
  static ExprPtr variable(char v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->var = v;
    return e;
  }
  static ExprPtr node(Kind k, ExprPtr a, ExprPtr b = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }
  static ExprPtr call(Fn f, ExprPtr a, ExprPtr b = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Call;
    e->fn = f;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
  }
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : s_(text) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw SyntaxError(pos_, "unexpected trailing input");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw SyntaxError(pos_, std::string("expected '") + c + "'");
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = Expr::node(Expr::Kind::Add, lhs, term());
      else if (accept('-'))
        lhs = Expr::node(Expr::Kind::Sub, lhs, term());
      else
        return lhs;
    }
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = Expr::node(Expr::Kind::Mul, lhs, unary());
      else if (accept('/'))
        lhs = Expr::node(Expr::Kind::Div, lhs, unary());
      else
        return lhs;
    }
  }

  ExprPtr unary() {
    if (accept('-')) return Expr::node(Expr::Kind::Neg, unary());
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (accept('^')) return Expr::node(Expr::Kind::Pow, base, unary());
    return base;
  }

  ExprPtr atom() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      ExprPtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw SyntaxError(pos_, "expected a value");
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' || s_[pos_] == 'e' ||
            s_[pos_] == 'E' || ((s_[pos_] == '+' || s_[pos_] == '-') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
      ++pos_;
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(s_.substr(start, pos_ - start)), &used);
      if (used != pos_ - start) throw SyntaxError(start, "malformed number");
      return Expr::constant(v);
    } catch (const std::invalid_argument&) {
      throw SyntaxError(start, "malformed number");
    }
  }

  ExprPtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    if (name == "t") return Expr::variable('t');
    if (name == "x") return Expr::variable('x');
    if (name == "pi") return Expr::constant(kPi);
    Expr::Fn fn;
    int arity = 1;
    if (name == "sin")
      fn = Expr::Fn::Sin;
    else if (name == "cos")
      fn = Expr::Fn::Cos;
    else if (name == "exp")
      fn = Expr::Fn::Exp;
    else if (name == "log")
      fn = Expr::Fn::Log;
    else if (name == "sqrt")
      fn = Expr::Fn::Sqrt;
    else if (name == "abs")
      fn = Expr::Fn::Abs;
    else if (name == "min") {
      fn = Expr::Fn::Min;
      arity = 2;
    } else if (name == "max") {
      fn = Expr::Fn::Max;
      arity = 2;
    } else {
      throw UnknownFunction(name);
    }
    expect('(');
    ExprPtr a = expr();
    ExprPtr b;
    if (arity == 2) {
      expect(',');
      b = expr();
    }
    expect(')');
    return Expr::call(fn, a, b);
  }
};

}  // namespace detail

inline ExprPtr parse_expression(std::string_view text) { return detail::ExprParser(text).parse(); }

inline double eval(const ExprPtr& e, double t, double x) {
  switch (e->kind) {
    case Expr::Kind::Const:
      return e->value;
    case Expr::Kind::Var:
      return e->var == 't' ? t : x;
    case Expr::Kind::Neg:
      return -eval(e->a, t, x);
    case Expr::Kind::Add:
      return eval(e->a, t, x) + eval(e->b, t, x);
    case Expr::Kind::Sub:
      return eval(e->a, t, x) - eval(e->b, t, x);
    case Expr::Kind::Mul:
      return eval(e->a, t, x) * eval(e->b, t, x);
    case Expr::Kind::Div: {
      const double d = eval(e->b, t, x);
      if (d == 0.0) throw EvaluationError("division by zero");
      return eval(e->a, t, x) / d;
    }
    case Expr::Kind::Pow: {
      const double base = eval(e->a, t, x);
      const double ex = eval(e->b, t, x);
      const double r = std::pow(base, ex);
      if (!std::isfinite(r)) throw EvaluationError("pow out of domain");
      return r;
    }
    case Expr::Kind::Call: {
      const double a = eval(e->a, t, x);
      switch (e->fn) {
        case Expr::Fn::Sin:
          return std::sin(a);
        case Expr::Fn::Cos:
          return std::cos(a);
        case Expr::Fn::Exp:
          return std::exp(a);
        case Expr::Fn::Log:
          if (a <= 0.0) throw EvaluationError("log of non-positive value");
          return std::log(a);
        case Expr::Fn::Sqrt:
          if (a < 0.0) throw EvaluationError("sqrt of negative value");
          return std::sqrt(a);
        case Expr::Fn::Abs:
          return std::fabs(a);
        case Expr::Fn::Min:
          return std::min(a, eval(e->b, t, x));
        case Expr::Fn::Max:
          return std::max(a, eval(e->b, t, x));
      }
      throw EvaluationError("unreachable");
    }
  }
  throw EvaluationError("unreachable");
}

namespace detail {

inline bool is_const(const ExprPtr& e, double v) { return e->kind == Expr::Kind::Const && e->value == v; }

inline ExprPtr mk_add(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  if (a->kind == Expr::Kind::Const && b->kind == Expr::Kind::Const) return Expr::constant(a->value + b->value);
  return Expr::node(Expr::Kind::Add, a, b);
}
inline ExprPtr mk_sub(ExprPtr a, ExprPtr b) {
  if (is_const(b, 0)) return a;
  if (a->kind == Expr::Kind::Const && b->kind == Expr::Kind::Const) return Expr::constant(a->value - b->value);
  if (is_const(a, 0)) return Expr::node(Expr::Kind::Neg, b);
  return Expr::node(Expr::Kind::Sub, a, b);
}
inline ExprPtr mk_mul(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0) || is_const(b, 0)) return Expr::constant(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (a->kind == Expr::Kind::Const && b->kind == Expr::Kind::Const) return Expr::constant(a->value * b->value);
  return Expr::node(Expr::Kind::Mul, a, b);
}
inline ExprPtr mk_div(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0)) return Expr::constant(0);
  if (is_const(b, 1)) return a;
  return Expr::node(Expr::Kind::Div, a, b);
}

}  // namespace detail

// Symbolic partial derivative with respect to 't' or 'x'. Non-smooth nodes
// (abs, min, max) are rejected; grid-backed fields use finite differences
// instead.
inline ExprPtr derivative(const ExprPtr& e, char var) {
  using detail::mk_add;
  using detail::mk_div;
  using detail::mk_mul;
  using detail::mk_sub;
  switch (e->kind) {
    case Expr::Kind::Const:
      return Expr::constant(0);
    case Expr::Kind::Var:
      return Expr::constant(e->var == var ? 1 : 0);
    case Expr::Kind::Neg:
      return Expr::node(Expr::Kind::Neg, derivative(e->a, var));
    case Expr::Kind::Add:
      return mk_add(derivative(e->a, var), derivative(e->b, var));
    case Expr::Kind::Sub:
      return mk_sub(derivative(e->a, var), derivative(e->b, var));
    case Expr::Kind::Mul:
      return mk_add(mk_mul(derivative(e->a, var), e->b), mk_mul(e->a, derivative(e->b, var)));
    case Expr::Kind::Div:
      return mk_div(mk_sub(mk_mul(derivative(e->a, var), e->b), mk_mul(e->a, derivative(e->b, var))),
                    Expr::node(Expr::Kind::Pow, e->b, Expr::constant(2)));
    case Expr::Kind::Pow: {
      if (e->b->kind == Expr::Kind::Const) {
        const double p = e->b->value;
        return mk_mul(Expr::constant(p),
                      mk_mul(Expr::node(Expr::Kind::Pow, e->a, Expr::constant(p - 1)), derivative(e->a, var)));
      }
      // a^b = exp(b log a)
      ExprPtr loga = Expr::call(Expr::Fn::Log, e->a);
      ExprPtr inner = mk_add(mk_mul(derivative(e->b, var), loga), mk_div(mk_mul(e->b, derivative(e->a, var)), e->a));
      return mk_mul(Expr::node(Expr::Kind::Pow, e->a, e->b), inner);
    }
    case Expr::Kind::Call: {
      ExprPtr da = derivative(e->a, var);
      switch (e->fn) {
        case Expr::Fn::Sin:
          return mk_mul(Expr::call(Expr::Fn::Cos, e->a), da);
        case Expr::Fn::Cos:
          return Expr::node(Expr::Kind::Neg, mk_mul(Expr::call(Expr::Fn::Sin, e->a), da));
        case Expr::Fn::Exp:
          return mk_mul(Expr::call(Expr::Fn::Exp, e->a), da);
        case Expr::Fn::Log:
          return mk_div(da, e->a);
        case Expr::Fn::Sqrt:
          return mk_div(da, mk_mul(Expr::constant(2), Expr::call(Expr::Fn::Sqrt, e->a)));
        case Expr::Fn::Abs:
        case Expr::Fn::Min:
        case Expr::Fn::Max:
          throw EvaluationError("derivative of non-smooth function");
      }
      throw EvaluationError("unreachable");
    }
  }
  throw EvaluationError("unreachable");
}

inline std::string print(const ExprPtr& e) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  switch (e->kind) {
    case Expr::Kind::Const:
      return e->value < 0 ? "(" + num(e->value) + ")" : num(e->value);
    case Expr::Kind::Var:
      return std::string(1, e->var);
    case Expr::Kind::Neg:
      return "(-" + print(e->a) + ")";
    case Expr::Kind::Add:
      return "(" + print(e->a) + " + " + print(e->b) + ")";
    case Expr::Kind::Sub:
      return "(" + print(e->a) + " - " + print(e->b) + ")";
    case Expr::Kind::Mul:
      return "(" + print(e->a) + " * " + print(e->b) + ")";
    case Expr::Kind::Div:
      return "(" + print(e->a) + " / " + print(e->b) + ")";
    case Expr::Kind::Pow:
      return "(" + print(e->a) + "^" + print(e->b) + ")";
    case Expr::Kind::Call: {
      static const char* names[] = {"sin", "cos", "exp", "log", "sqrt", "abs", "min", "max"};
      std::string s = names[static_cast<int>(e->fn)];
      s += "(" + print(e->a);
      if (e->b) s += ", " + print(e->b);
      return s + ")";
    }
  }
  return {};
}

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Const:
      return a->value == b->value;
    case Expr::Kind::Var:
      return a->var == b->var;
    case Expr::Kind::Call:
      if (a->fn != b->fn) return false;
      [[fallthrough]];
    default:
      if ((a->a == nullptr) != (b->a == nullptr) || (a->b == nullptr) != (b->b == nullptr)) return false;
      if (a->a && !equal(a->a, b->a)) return false;
      if (a->b && !equal(a->b, b->b)) return false;
      return true;
  }
}

}  // namespace fermisig
