#pragma once

// Coefficient DSL: closed-form smooth expressions plus distributional atoms
// (Heaviside steps and Dirac derivatives) carried symbolically.  Grammar:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ['-'] base ('^' integer)?
//   base   := number | 't' | 'x' | 'x1'..'x9' | func '(' args ')' | '(' expr ')'
//   func   := sin | cos | exp | bump | H | delta | ddelta
//
// Atoms may be scaled by constants only; any genuine product of two
// distributions is rejected at parse time.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vws/bump.hpp"

namespace vws {

class parse_error : public std::runtime_error {
 public:
  parse_error(std::size_t offset, const std::string& what)
      : std::runtime_error("parse error at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class eval_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Smooth expression trees
// ---------------------------------------------------------------------------

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { constant, variable, add, sub, mul, div, pow, neg, sin, cos, exp, bump };

  Kind kind = Kind::constant;
  std::complex<double> value{0.0, 0.0};  // constant
  std::string var;                       // variable: "t", "x1".."x9"
  ExprPtr lhs, rhs;                      // binary ops; unary ops use lhs
  int ipow = 0;                          // pow exponent (>= 0)
  // bump(arg; center, radius) with derivative order: B^(k)((arg-c)/r) / r^k
  double center = 0.0;
  double radius = 1.0;
  int bump_deriv = 0;
};

struct EvalPoint {
  double t = 0.0;
  const double* x = nullptr;
  int dim = 0;

  double lookup(const std::string& v) const {
    if (v == "t") return t;
    int j = v[1] - '1';
    if (j < 0 || j >= dim)
      throw eval_error("variable " + v + " out of range for dimension " + std::to_string(dim));
    return x[j];
  }
};

namespace exprs {

inline ExprPtr constant(std::complex<double> v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::constant;
  n->value = v;
  return n;
}
inline ExprPtr constant(double v) { return constant(std::complex<double>(v, 0.0)); }

inline ExprPtr variable(std::string name) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::variable;
  n->var = std::move(name);
  return n;
}

inline bool is_zero(const ExprPtr& e) {
  return e->kind == ExprNode::Kind::constant && e->value == std::complex<double>(0.0, 0.0);
}
inline bool is_one(const ExprPtr& e) {
  return e->kind == ExprNode::Kind::constant && e->value == std::complex<double>(1.0, 0.0);
}

inline ExprPtr binary(ExprNode::Kind k, ExprPtr a, ExprPtr b) {
  using K = ExprNode::Kind;
  if (k == K::add) {
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
  }
  if (k == K::sub && is_zero(b)) return a;
  if (k == K::mul) {
    if (is_zero(a) || is_zero(b)) return constant(0.0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
  }
  if (k == K::div && is_zero(a)) return a;
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

inline ExprPtr add(ExprPtr a, ExprPtr b) { return binary(ExprNode::Kind::add, a, b); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(ExprNode::Kind::sub, a, b); }
inline ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(ExprNode::Kind::mul, a, b); }
inline ExprPtr div(ExprPtr a, ExprPtr b) { return binary(ExprNode::Kind::div, a, b); }

inline ExprPtr unary(ExprNode::Kind k, ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->lhs = std::move(a);
  return n;
}

inline ExprPtr neg(ExprPtr a) {
  if (is_zero(a)) return a;
  return unary(ExprNode::Kind::neg, a);
}

inline ExprPtr pow(ExprPtr a, int k) {
  if (k == 0) return constant(1.0);
  if (k == 1) return a;
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::pow;
  n->lhs = std::move(a);
  n->ipow = k;
  return n;
}

inline ExprPtr bump(ExprPtr arg, double center = 0.0, double radius = 1.0, int deriv = 0) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::bump;
  n->lhs = std::move(arg);
  n->center = center;
  n->radius = radius;
  n->bump_deriv = deriv;
  return n;
}

inline std::complex<double> eval(const ExprNode& e, const EvalPoint& p) {
  using K = ExprNode::Kind;
  switch (e.kind) {
    case K::constant: return e.value;
    case K::variable: return {p.lookup(e.var), 0.0};
    case K::add: return eval(*e.lhs, p) + eval(*e.rhs, p);
    case K::sub: return eval(*e.lhs, p) - eval(*e.rhs, p);
    case K::mul: return eval(*e.lhs, p) * eval(*e.rhs, p);
    case K::div: {
      auto d = eval(*e.rhs, p);
      if (d == std::complex<double>(0.0, 0.0)) throw eval_error("division by zero");
      return eval(*e.lhs, p) / d;
    }
    case K::pow: {
      auto b = eval(*e.lhs, p);
      std::complex<double> r{1.0, 0.0};
      for (int i = 0; i < e.ipow; ++i) r *= b;
      return r;
    }
    case K::neg: return -eval(*e.lhs, p);
    case K::sin: return std::sin(eval(*e.lhs, p));
    case K::cos: return std::cos(eval(*e.lhs, p));
    case K::exp: return std::exp(eval(*e.lhs, p));
    case K::bump: {
      auto a = eval(*e.lhs, p);
      if (a.imag() != 0.0) throw eval_error("bump of a non-real argument");
      double u = (a.real() - e.center) / e.radius;
      return {bump_profile(u, e.bump_deriv) / std::pow(e.radius, e.bump_deriv), 0.0};
    }
  }
  throw eval_error("corrupt expression node");
}

inline ExprPtr diff(const ExprPtr& e, const std::string& v) {
  using K = ExprNode::Kind;
  switch (e->kind) {
    case K::constant: return constant(0.0);
    case K::variable: return constant(e->var == v ? 1.0 : 0.0);
    case K::add: return add(diff(e->lhs, v), diff(e->rhs, v));
    case K::sub: return sub(diff(e->lhs, v), diff(e->rhs, v));
    case K::mul: return add(mul(diff(e->lhs, v), e->rhs), mul(e->lhs, diff(e->rhs, v)));
    case K::div:
      return div(sub(mul(diff(e->lhs, v), e->rhs), mul(e->lhs, diff(e->rhs, v))),
                 pow(e->rhs, 2));
    case K::pow:
      return mul(mul(constant(double(e->ipow)), pow(e->lhs, e->ipow - 1)), diff(e->lhs, v));
    case K::neg: return neg(diff(e->lhs, v));
    case K::sin: return mul(unary(K::cos, e->lhs), diff(e->lhs, v));
    case K::cos: return neg(mul(unary(K::sin, e->lhs), diff(e->lhs, v)));
    case K::exp: return mul(unary(K::exp, e->lhs), diff(e->lhs, v));
    case K::bump: {
      auto chain = diff(e->lhs, v);
      if (is_zero(chain)) return chain;
      return mul(bump(e->lhs, e->center, e->radius, e->bump_deriv + 1), chain);
    }
  }
  throw eval_error("corrupt expression node");
}

inline bool depends_on(const ExprNode& e, const std::string& v) {
  using K = ExprNode::Kind;
  switch (e.kind) {
    case K::constant: return false;
    case K::variable: return e.var == v;
    case K::add:
    case K::sub:
    case K::mul:
    case K::div: return depends_on(*e.lhs, v) || depends_on(*e.rhs, v);
    default: return e.lhs && depends_on(*e.lhs, v);
  }
}

inline bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  using K = ExprNode::Kind;
  switch (a.kind) {
    case K::constant: return a.value == b.value;
    case K::variable: return a.var == b.var;
    case K::pow:
      return a.ipow == b.ipow && structurally_equal(*a.lhs, *b.lhs);
    case K::bump:
      return a.center == b.center && a.radius == b.radius && a.bump_deriv == b.bump_deriv &&
             structurally_equal(*a.lhs, *b.lhs);
    case K::add:
    case K::sub:
    case K::mul:
    case K::div:
      return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    default: return structurally_equal(*a.lhs, *b.lhs);
  }
}

}  // namespace exprs

// ---------------------------------------------------------------------------
// Atoms and CoeffExpr
// ---------------------------------------------------------------------------

enum class AtomKind { heaviside, dirac };

struct Atom {
  AtomKind kind = AtomKind::heaviside;
  int order = 0;  // derivative order for dirac atoms (0 = plain delta)
  double location = 0.0;
  std::complex<double> coefficient{1.0, 0.0};
  std::string variable = "x1";  // "t" or "x1".."x9"

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.kind == b.kind && a.order == b.order && a.location == b.location &&
           a.coefficient == b.coefficient && a.variable == b.variable;
  }
};

struct SupportInterval {
  bool bounded = false;
  double lo = 0.0, hi = 0.0;  // only meaningful when bounded
  bool empty = false;         // identically zero
};

class CoeffExpr {
 public:
  CoeffExpr() : smooth_(exprs::constant(0.0)) {}
  explicit CoeffExpr(ExprPtr smooth, std::vector<Atom> atoms = {})
      : smooth_(std::move(smooth)), atoms_(std::move(atoms)) {
    validate_atoms();
  }

  const ExprPtr& smooth_part() const { return smooth_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool has_atoms() const { return !atoms_.empty(); }
  bool has_dirac() const {
    return std::any_of(atoms_.begin(), atoms_.end(),
                       [](const Atom& a) { return a.kind == AtomKind::dirac; });
  }

  // The unique variable carrying atoms, if any.
  std::optional<std::string> singular_variable() const {
    if (atoms_.empty()) return std::nullopt;
    return atoms_.front().variable;
  }

  bool is_identically_zero() const {
    return atoms_.empty() && exprs::is_zero(smooth_);
  }

  bool depends_on_t() const {
    if (exprs::depends_on(*smooth_, "t")) return true;
    return std::any_of(atoms_.begin(), atoms_.end(),
                       [](const Atom& a) { return a.variable == "t"; });
  }

  // Truncation window for non-compact smooth parts (half-width); coefficients
  // are smoothly cut to zero across [window-0.5, window].
  double window() const { return window_; }
  void set_window(double w) { window_ = w; }

  static constexpr double kTransitionWidth = 0.5;

  friend bool operator==(const CoeffExpr& a, const CoeffExpr& b) {
    return a.atoms_ == b.atoms_ && exprs::structurally_equal(*a.smooth_, *b.smooth_);
  }

 private:
  void validate_atoms() {
    for (const Atom& a : atoms_)
      if (a.variable != atoms_.front().variable)
        throw parse_error(0, "atoms in two distinct singular variables (" +
                                 atoms_.front().variable + " and " + a.variable + ")");
  }

  ExprPtr smooth_;
  std::vector<Atom> atoms_;
  double window_ = 5.0;
};

// Pointwise value of the smooth part plus Heaviside atoms, convention H(0)=1.
inline std::complex<double> eval_smooth(const CoeffExpr& e, double t, const double* x, int dim) {
  if (e.has_dirac()) throw eval_error("Dirac atom is not pointwise-evaluable");
  EvalPoint p{t, x, dim};
  std::complex<double> v = exprs::eval(*e.smooth_part(), p);
  for (const Atom& a : e.atoms()) {
    double arg = (a.variable == "t") ? t : p.lookup(a.variable);
    if (arg >= a.location) v += a.coefficient;
  }
  return v;
}

inline std::complex<double> eval_smooth(const CoeffExpr& e, double t, double x) {
  return eval_smooth(e, t, &x, 1);
}

namespace detail {

// Conservative support analysis of the smooth part in the given variable set
// (all x_j); returns an interval in max-norm radius terms.
inline SupportInterval smooth_support(const ExprNode& e) {
  using K = ExprNode::Kind;
  SupportInterval r;
  switch (e.kind) {
    case K::constant:
      if (e.value == std::complex<double>(0.0, 0.0)) {
        r.empty = true;
        r.bounded = true;
      }
      return r;
    case K::bump: {
      // supported where |(arg-c)/r| <= 1; only resolvable when arg is a bare
      // spatial variable (the common case in scenarios).
      if (e.lhs->kind == K::variable && e.lhs->var != "t") {
        r.bounded = true;
        r.lo = e.center - e.radius;
        r.hi = e.center + e.radius;
      }
      return r;
    }
    case K::mul: {
      SupportInterval a = smooth_support(*e.lhs), b = smooth_support(*e.rhs);
      if (a.empty || b.empty) return {true, 0, 0, true};
      if (a.bounded && b.bounded)
        return {true, std::max(a.lo, b.lo), std::min(a.hi, b.hi), false};
      if (a.bounded) return a;
      if (b.bounded) return b;
      return r;
    }
    case K::div: {
      SupportInterval a = smooth_support(*e.lhs);
      return a;  // support of the quotient is within the numerator's
    }
    case K::add:
    case K::sub: {
      SupportInterval a = smooth_support(*e.lhs), b = smooth_support(*e.rhs);
      if (a.empty) return b;
      if (b.empty) return a;
      if (a.bounded && b.bounded)
        return {true, std::min(a.lo, b.lo), std::max(a.hi, b.hi), false};
      return r;
    }
    case K::neg: return smooth_support(*e.lhs);
    case K::pow:
      return e.ipow >= 1 ? smooth_support(*e.lhs) : r;
    default: return r;  // sin/cos/exp/variable: unbounded (exp(0)=1 etc.)
  }
}

}  // namespace detail

// Radius R such that the (truncated) coefficient vanishes for |x| > R.
inline double support_radius(const CoeffExpr& e) {
  double r = 0.0;
  bool any = false;
  SupportInterval s = detail::smooth_support(*e.smooth_part());
  if (!s.empty) {
    if (s.bounded) {
      r = std::max(std::abs(s.lo), std::abs(s.hi));
    } else {
      r = e.window();
    }
    any = true;
  }
  for (const Atom& a : e.atoms()) {
    any = true;
    if (a.kind == AtomKind::dirac) {
      r = std::max(r, std::abs(a.location));
    } else {
      r = e.window();  // Heaviside: half-line, truncated at the window
    }
  }
  return any ? r : 0.0;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  CoeffExpr parse() {
    CoeffExpr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw parse_error(pos_, "trailing input");
    return e;
  }

 private:
  // CoeffExpr-level arithmetic: atoms combine linearly, products of atoms are
  // rejected, atoms may be scaled/divided by constants only.
  static CoeffExpr ce_add(const CoeffExpr& a, const CoeffExpr& b, bool subtract, std::size_t at) {
    auto atoms = a.atoms();
    for (Atom at2 : b.atoms()) {
      if (subtract) at2.coefficient = -at2.coefficient;
      atoms.push_back(at2);
    }
    ExprPtr sm = subtract ? exprs::sub(a.smooth_part(), b.smooth_part())
                          : exprs::add(a.smooth_part(), b.smooth_part());
    try {
      return CoeffExpr(sm, std::move(atoms));
    } catch (const parse_error& pe) {
      throw parse_error(at, pe.what());
    }
  }

  CoeffExpr ce_mul(const CoeffExpr& a, const CoeffExpr& b, bool divide, std::size_t at) const {
    if (a.has_atoms() && b.has_atoms())
      throw parse_error(at, "product of distributions is not defined");
    if (!divide && !a.has_atoms() && !b.has_atoms())
      return CoeffExpr(exprs::mul(a.smooth_part(), b.smooth_part()));
    if (divide && !a.has_atoms())
      return CoeffExpr(exprs::div(a.smooth_part(), b.smooth_part()));
    // one side carries atoms: the other must be a constant
    const CoeffExpr& atomic = a.has_atoms() ? a : b;
    const CoeffExpr& plain = a.has_atoms() ? b : a;
    if (divide && b.has_atoms())
      throw parse_error(at, "division by a distribution is not defined");
    auto c = constant_value(plain.smooth_part());
    if (!c)
      throw parse_error(at, "distributional atoms may be scaled by constants only");
    std::complex<double> k = divide ? std::complex<double>(1.0, 0.0) / *c : *c;
    std::vector<Atom> atoms = atomic.atoms();
    for (Atom& x : atoms) x.coefficient *= k;
    ExprPtr sm = divide ? exprs::div(atomic.smooth_part(), exprs::constant(*c))
                        : exprs::mul(atomic.smooth_part(), exprs::constant(*c));
    return CoeffExpr(sm, std::move(atoms));
  }

  static std::optional<std::complex<double>> constant_value(const ExprPtr& e) {
    using K = ExprNode::Kind;
    switch (e->kind) {
      case K::constant: return e->value;
      case K::variable: return std::nullopt;
      case K::neg: {
        auto v = constant_value(e->lhs);
        return v ? std::optional(-*v) : std::nullopt;
      }
      case K::add:
      case K::sub:
      case K::mul:
      case K::div: {
        auto a = constant_value(e->lhs), b = constant_value(e->rhs);
        if (!a || !b) return std::nullopt;
        switch (e->kind) {
          case K::add: return *a + *b;
          case K::sub: return *a - *b;
          case K::mul: return *a * *b;
          default: return *a / *b;
        }
      }
      case K::pow: {
        auto a = constant_value(e->lhs);
        if (!a) return std::nullopt;
        std::complex<double> r{1.0, 0.0};
        for (int i = 0; i < e->ipow; ++i) r *= *a;
        return r;
      }
      default: {
        if (!e->lhs) return std::nullopt;
        auto a = constant_value(e->lhs);
        if (!a) return std::nullopt;
        EvalPoint p{};
        return exprs::eval(*e, p);  // safe: subtree is variable-free
      }
    }
  }

  CoeffExpr expr() {
    CoeffExpr acc = term();
    for (;;) {
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        std::size_t at = pos_;
        char op = get();
        acc = ce_add(acc, term(), op == '-', at);
      } else {
        return acc;
      }
    }
  }

  CoeffExpr term() {
    CoeffExpr acc = factor();
    for (;;) {
      skip_ws();
      if (peek() == '*' || peek() == '/') {
        std::size_t at = pos_;
        char op = get();
        acc = ce_mul(acc, factor(), op == '/', at);
      } else {
        return acc;
      }
    }
  }

  CoeffExpr factor() {
    skip_ws();
    bool negated = false;
    if (peek() == '-') {
      get();
      negated = true;
    }
    CoeffExpr b = base();
    skip_ws();
    if (peek() == '^') {
      std::size_t at = pos_;
      get();
      int k = integer();
      if (b.has_atoms())
        throw parse_error(at, "a distributional atom cannot be raised to a power");
      b = CoeffExpr(exprs::pow(b.smooth_part(), k));
    }
    if (negated) {
      std::vector<Atom> atoms = b.atoms();
      for (Atom& a : atoms) a.coefficient = -a.coefficient;
      // fold '-' on literal constants so printing round-trips structurally
      if (b.smooth_part()->kind == ExprNode::Kind::constant) {
        b = CoeffExpr(exprs::constant(-b.smooth_part()->value), std::move(atoms));
      } else {
        b = CoeffExpr(exprs::neg(b.smooth_part()), std::move(atoms));
      }
    }
    return b;
  }

  CoeffExpr base() {
    skip_ws();
    std::size_t at = pos_;
    char c = peek();
    if (c == '(') {
      get();
      CoeffExpr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return CoeffExpr(exprs::constant(number()));
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string id = identifier();
      skip_ws();
      if (peek() == '(') return call(id, at);
      if (id == "t") return CoeffExpr(exprs::variable("t"));
      if (id == "x") return CoeffExpr(exprs::variable("x1"));
      if (id.size() == 2 && id[0] == 'x' && id[1] >= '1' && id[1] <= '9')
        return CoeffExpr(exprs::variable(id));
      throw parse_error(at, "unknown identifier '" + id + "'");
    }
    throw parse_error(at, "expected a number, variable, function call or '('");
  }

  CoeffExpr call(const std::string& fn, std::size_t at) {
    expect('(');
    std::vector<CoeffExpr> args;
    skip_ws();
    if (peek() != ')') {
      args.push_back(expr());
      skip_ws();
      while (peek() == ',') {
        get();
        args.push_back(expr());
        skip_ws();
      }
    }
    expect(')');
    auto smooth_arg = [&](std::size_t i) -> ExprPtr {
      if (args[i].has_atoms())
        throw parse_error(at, fn + ": argument must be atom-free");
      return args[i].smooth_part();
    };
    auto const_arg = [&](std::size_t i) -> double {
      auto v = constant_value(smooth_arg(i));
      if (!v || v->imag() != 0.0)
        throw parse_error(at, fn + ": argument " + std::to_string(i + 1) + " must be a real constant");
      return v->real();
    };
    if (fn == "sin" || fn == "cos" || fn == "exp") {
      if (args.size() != 1) throw parse_error(at, fn + " takes one argument");
      auto k = fn == "sin" ? ExprNode::Kind::sin
                           : (fn == "cos" ? ExprNode::Kind::cos : ExprNode::Kind::exp);
      return CoeffExpr(exprs::unary(k, smooth_arg(0)));
    }
    if (fn == "bump") {
      // bump(e), bump(e, c), bump(e, c, r): exp(-1/(1-u^2)), u = (e-c)/r.
      if (args.empty() || args.size() > 3) throw parse_error(at, "bump takes 1..3 arguments");
      double c0 = args.size() >= 2 ? const_arg(1) : 0.0;
      double r0 = args.size() >= 3 ? const_arg(2) : 1.0;
      if (!(r0 > 0)) throw parse_error(at, "bump radius must be positive");
      return CoeffExpr(exprs::bump(smooth_arg(0), c0, r0));
    }
    if (fn == "H" || fn == "delta" || fn == "ddelta") {
      Atom a;
      if (fn == "H") {
        a.kind = AtomKind::heaviside;
        if (args.size() != 1) throw parse_error(at, "H takes one argument");
      } else {
        a.kind = AtomKind::dirac;
        a.order = (fn == "ddelta") ? 1 : 0;
        if (args.size() == 2) {
          double k = const_arg(1);
          if (k < 0 || k != std::floor(k))
            throw parse_error(at, "delta derivative order must be a non-negative integer");
          a.order += int(k);
        } else if (args.size() != 1) {
          throw parse_error(at, fn + " takes the atom argument and an optional order");
        }
      }
      affine_location(smooth_arg(0), a, at);
      return CoeffExpr(exprs::constant(0.0), {a});
    }
    throw parse_error(at, "unknown function '" + fn + "'");
  }

  // Atom argument must be (var - location); extracts variable and location.
  void affine_location(const ExprPtr& arg, Atom& a, std::size_t at) const {
    const char* vars[] = {"t", "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9"};
    std::string found;
    for (const char* v : vars) {
      ExprPtr d = exprs::diff(arg, v);
      auto c = constant_value(d);
      if (!c) throw parse_error(at, "atom argument must be affine in one variable");
      if (*c == std::complex<double>(0.0, 0.0)) continue;
      if (*c != std::complex<double>(1.0, 0.0))
        throw parse_error(at, "atom argument must have unit slope in its variable");
      if (!found.empty()) throw parse_error(at, "atom argument involves two variables");
      found = v;
    }
    if (found.empty()) throw parse_error(at, "atom argument must involve a variable");
    a.variable = found;
    // location: arg = var - loc, so loc = var_value - arg at var_value = 0
    double zeros[9] = {0};
    EvalPoint p{0.0, zeros, 9};
    auto v0 = exprs::eval(*arg, p);
    if (v0.imag() != 0.0) throw parse_error(at, "atom location must be real");
    a.location = -v0.real();
  }

  // lexer helpers -----------------------------------------------------------
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  char get() { return pos_ < s_.size() ? s_[pos_++] : '\0'; }
  void expect(char c) {
    skip_ws();
    if (peek() != c)
      throw parse_error(pos_, std::string("expected '") + c + "'");
    get();
  }

  double number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' belonged to something else
      }
    }
    try {
      return std::stod(std::string(s_.substr(start, pos_ - start)));
    } catch (...) {
      throw parse_error(start, "malformed number");
    }
  }

  int integer() {
    skip_ws();
    std::size_t start = pos_;
    bool negative = false;
    if (peek() == '-') {
      get();
      negative = true;
    }
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      throw parse_error(pos_, "expected an integer exponent");
    long v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) v = v * 10 + (get() - '0');
    if (negative) throw parse_error(start, "negative exponents are not supported; use '/'");
    return int(v);
  }

  std::string identifier() {
    std::string id;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      id += s_[pos_++];
    return id;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline CoeffExpr parse_expr(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Canonical printer (parse . print . parse == parse)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

inline void print_node(const ExprNode& e, std::ostream& os, int parent_prec) {
  using K = ExprNode::Kind;
  auto paren = [&](int prec, auto&& body) {
    if (prec < parent_prec) {
      os << '(';
      body();
      os << ')';
    } else {
      body();
    }
  };
  switch (e.kind) {
    case K::constant: {
      if (e.value.imag() != 0.0) throw eval_error("cannot print a complex constant");
      double v = e.value.real();
      if (v < 0) {
        paren(2, [&] { os << '-' << fmt_real(-v); });
      } else {
        os << fmt_real(v);
      }
      return;
    }
    case K::variable: os << (e.var == "x1" ? "x" : e.var); return;
    case K::add:
      paren(1, [&] {
        print_node(*e.lhs, os, 1);
        os << " + ";
        print_node(*e.rhs, os, 2);
      });
      return;
    case K::sub:
      paren(1, [&] {
        print_node(*e.lhs, os, 1);
        os << " - ";
        print_node(*e.rhs, os, 2);
      });
      return;
    case K::mul:
      paren(2, [&] {
        print_node(*e.lhs, os, 2);
        os << "*";
        print_node(*e.rhs, os, 3);
      });
      return;
    case K::div:
      paren(2, [&] {
        print_node(*e.lhs, os, 2);
        os << "/";
        print_node(*e.rhs, os, 3);
      });
      return;
    case K::neg:
      paren(2, [&] {
        os << '-';
        print_node(*e.lhs, os, 3);
      });
      return;
    case K::pow:
      paren(3, [&] {
        print_node(*e.lhs, os, 4);
        os << '^' << e.ipow;
      });
      return;
    case K::sin:
    case K::cos:
    case K::exp:
      os << (e.kind == K::sin ? "sin" : e.kind == K::cos ? "cos" : "exp") << '(';
      print_node(*e.lhs, os, 0);
      os << ')';
      return;
    case K::bump:
      if (e.bump_deriv != 0) throw eval_error("cannot print a bump derivative node");
      os << "bump(";
      print_node(*e.lhs, os, 0);
      if (e.center != 0.0 || e.radius != 1.0) os << ", " << fmt_real(e.center);
      if (e.radius != 1.0) os << ", " << fmt_real(e.radius);
      os << ')';
      return;
  }
}

}  // namespace detail

inline std::string print_expr(const CoeffExpr& e) {
  std::ostringstream os;
  bool first = true;
  if (!exprs::is_zero(e.smooth_part())) {
    detail::print_node(*e.smooth_part(), os, 0);
    first = false;
  }
  std::vector<Atom> atoms = e.atoms();
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.order != b.order) return a.order < b.order;
    return a.location < b.location;
  });
  for (const Atom& a : atoms) {
    std::complex<double> c = a.coefficient;
    if (c.imag() != 0.0) throw eval_error("cannot print a complex atom coefficient");
    bool negative = c.real() < 0.0;
    double mag = std::abs(c.real());
    if (first) {
      if (negative) os << "-";
      first = false;
    } else {
      os << (negative ? " - " : " + ");
    }
    if (mag != 1.0) os << detail::fmt_real(mag) << "*";
    std::string var = a.variable == "x1" ? "x" : a.variable;
    std::string arg = var;
    if (a.location > 0)
      arg += " - " + detail::fmt_real(a.location);
    else if (a.location < 0)
      arg += " + " + detail::fmt_real(-a.location);
    if (a.kind == AtomKind::heaviside) {
      os << "H(" << arg << ")";
    } else if (a.order == 0) {
      os << "delta(" << arg << ")";
    } else if (a.order == 1) {
      os << "ddelta(" << arg << ")";
    } else {
      os << "delta(" << arg << ", " << a.order << ")";
    }
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace vws
