#include "canard/expr_bridge.hpp"

namespace canard {

Expr to_expr(const PolyQ& p, const std::string& var) {
  std::vector<Expr> terms;
  Expr x = Expr::variable(var);
  for (int i = 0; i <= p.degree(); ++i) {
    Rational c = p.coeff(i);
    if (c.is_zero()) continue;
    if (i == 0)
      terms.push_back(Expr::constant(c));
    else
      terms.push_back(Expr::mul({Expr::constant(c), Expr::pow(x, i)}));
  }
  return Expr::add(std::move(terms));
}

Expr to_expr(const RatFuncQ& f, const std::string& var) {
  if (f.is_polynomial()) return to_expr(f.num(), var);
  return to_expr(f.num(), var) / to_expr(f.den(), var);
}

}  // namespace canard
