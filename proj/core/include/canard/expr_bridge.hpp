#pragma once

#include "canard/ratfunc.hpp"
#include "canard/ring_eval.hpp"

namespace canard {

/// Ring ops for evaluating an Expr into RatFunc<K>. Unbound variables and
/// sqrt nodes are NotRational: callers bind every symbol they intend to keep.
template <class K>
struct RatFuncOps {
  using value_type = RatFunc<K>;
  RatFunc<K> from_rational(const Rational& q) const { return RatFunc<K>::from_rational(q); }
  RatFunc<K> add(const RatFunc<K>& a, const RatFunc<K>& b) const { return a + b; }
  RatFunc<K> mul(const RatFunc<K>& a, const RatFunc<K>& b) const { return a * b; }
  RatFunc<K> pow(const RatFunc<K>& a, long e) const { return a.pow(e); }
  [[noreturn]] RatFunc<K> sqrt(const RatFunc<K>&) const {
    fail(errc::not_rational, "sqrt node in rational-function conversion");
  }
  [[noreturn]] RatFunc<K> unbound(const std::string& name) const {
    fail(errc::not_rational, "extra symbolic variable '" + name + "'");
  }
};

/// Reduced rational function in `var`; every other free symbol (or any sqrt)
/// is a NotRational error, so parameters must be substituted first.
inline RatFuncQ to_ratfunc(const Expr& e, const std::string& var) {
  std::map<std::string, RatFuncQ> bind{{var, RatFuncQ::x()}};
  return eval_in(e, bind, RatFuncOps<Rational>{});
}

/// Evaluates an Expr over RatFunc<K> with explicit bindings for every symbol.
template <class K>
RatFunc<K> eval_ratfunc(const Expr& e, const std::map<std::string, RatFunc<K>>& bindings) {
  return eval_in(e, bindings, RatFuncOps<K>{});
}

/// Renders an exact polynomial / rational function back into an Expr in the
/// named variable.
Expr to_expr(const PolyQ& p, const std::string& var);
Expr to_expr(const RatFuncQ& f, const std::string& var);

}  // namespace canard
