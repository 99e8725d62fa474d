#pragma once

#include <cmath>
#include <map>
#include <string>

#include "canard/expr.hpp"

namespace canard {

/// Evaluates a canonical Expr in an arbitrary commutative ring. The ops
/// object supplies value_type, from_rational, add, mul, pow (negative
/// exponent = reciprocal), sqrt and the unbound-variable policy. One template
/// serves numeric and exact evaluation, substitution, rational-function
/// conversion and power series expansion.
template <class Ops>
typename Ops::value_type eval_in(const Expr& e,
                                 const std::map<std::string, typename Ops::value_type>& bindings,
                                 const Ops& ops = Ops{}) {
  using R = typename Ops::value_type;
  switch (e.kind()) {
    case ExprKind::constant:
      return ops.from_rational(e.value());
    case ExprKind::variable: {
      auto it = bindings.find(e.name());
      if (it == bindings.end()) return ops.unbound(e.name());
      return it->second;
    }
    case ExprKind::sum: {
      R acc = ops.from_rational(Rational(0));
      for (const Expr& k : e.children()) acc = ops.add(acc, eval_in(k, bindings, ops));
      return acc;
    }
    case ExprKind::product: {
      R acc = ops.from_rational(Rational(1));
      for (const Expr& k : e.children()) acc = ops.mul(acc, eval_in(k, bindings, ops));
      return acc;
    }
    case ExprKind::power:
      return ops.pow(eval_in(e.children()[0], bindings, ops), e.exponent());
    case ExprKind::sqrt_:
      return ops.sqrt(eval_in(e.children()[0], bindings, ops));
  }
  fail(errc::internal, "unhandled expression kind");
}

struct DoubleOps {
  using value_type = double;
  double from_rational(const Rational& q) const { return q.to_double(); }
  double add(double a, double b) const { return a + b; }
  double mul(double a, double b) const { return a * b; }
  double pow(double base, long e) const {
    if (base == 0.0 && e < 0) fail(errc::pole_at_point, "zero raised to negative power");
    return std::pow(base, static_cast<double>(e));
  }
  double sqrt(double a) const {
    if (a < 0.0) fail(errc::negative_radicand, "sqrt of negative value");
    return std::sqrt(a);
  }
  [[noreturn]] double unbound(const std::string& name) const {
    fail(errc::unknown_identifier, "unbound variable '" + name + "' in numeric evaluation");
  }
};

struct RationalOps {
  using value_type = Rational;
  Rational from_rational(const Rational& q) const { return q; }
  Rational add(const Rational& a, const Rational& b) const { return a + b; }
  Rational mul(const Rational& a, const Rational& b) const { return a * b; }
  Rational pow(const Rational& base, long e) const {
    if (base.is_zero() && e < 0) fail(errc::pole_at_point, "zero raised to negative power");
    return base.pow(e);
  }
  [[noreturn]] Rational sqrt(const Rational&) const {
    fail(errc::sqrt_present, "sqrt node in exact evaluation");
  }
  [[noreturn]] Rational unbound(const std::string& name) const {
    fail(errc::unknown_identifier, "unbound variable '" + name + "' in exact evaluation");
  }
};

struct ExprOps {
  using value_type = Expr;
  Expr from_rational(const Rational& q) const { return Expr::constant(q); }
  Expr add(const Expr& a, const Expr& b) const { return a + b; }
  Expr mul(const Expr& a, const Expr& b) const { return a * b; }
  Expr pow(const Expr& base, long e) const { return Expr::pow(base, e); }
  Expr sqrt(const Expr& a) const { return Expr::sqrt(a); }
  Expr unbound(const std::string& name) const { return Expr::variable(name); }
};

}  // namespace canard
