#include "canard/expansion.hpp"

#include <optional>
#include <random>

namespace canard {

SolveBranch parse_branch(const std::string& text) {
  if (text == "linear") return SolveBranch::linear;
  if (text == "quadratic-positive") return SolveBranch::quadratic_positive;
  if (text == "quadratic-negative") return SolveBranch::quadratic_negative;
  fail(errc::bad_model_file, "unknown branch '" + text + "'");
}

std::string branch_name(SolveBranch b) {
  switch (b) {
    case SolveBranch::linear: return "linear";
    case SolveBranch::quadratic_positive: return "quadratic-positive";
    case SolveBranch::quadratic_negative: return "quadratic-negative";
  }
  return "?";
}

bool is_zero_expr(const Expr& e) {
  if (e.is_zero()) return true;
  if (e.is_constant()) return false;

  std::set<std::string> vars = free_variables(e);
  std::mt19937 rng(0x5eed);
  std::uniform_int_distribution<long> num(-1000000, 1000000), den(1, 997);
  int done = 0;
  for (int attempt = 0; attempt < 120 && done < 20; ++attempt) {
    std::map<std::string, Rational> point;
    std::map<std::string, double> dpoint;
    for (const std::string& v : vars) {
      Rational r(num(rng), den(rng));
      point.emplace(v, r);
      dpoint.emplace(v, r.to_double());
    }
    try {
      if (!eval_exact(e, point).is_zero()) return false;
      ++done;
    } catch (const error& err) {
      if (err.code() == errc::sqrt_present) {
        try {
          if (std::abs(eval_numeric(e, dpoint)) > 1e-9) return false;
          ++done;
        } catch (const error&) {
          // pole or negative radicand: draw another point
        }
      }
      // pole: draw another point
    }
  }
  return done > 0;
}

namespace {

Expr subst_var(const Expr& e, const std::string& var, const Expr& value) {
  return substitute(e, {{var, value}});
}

}  // namespace

VarQuadratic extract_quadratic(const Expr& E, const std::string& var) {
  Expr d1 = differentiate(E, var);
  Expr d2 = differentiate(d1, var);
  Expr d3 = differentiate(d2, var);
  if (!is_zero_expr(d3))
    fail(errc::degree_too_high, "'" + var + "' appears at degree >= 3 (or non-polynomially)");
  try {
    VarQuadratic q;
    q.a0 = subst_var(E, var, Expr::constant(0));
    q.a1 = subst_var(d1, var, Expr::constant(0));
    q.a2 = Expr::constant(Rational(1, 2)) * subst_var(d2, var, Expr::constant(0));
    return q;
  } catch (const error&) {
    fail(errc::degree_too_high, "'" + var + "' appears non-polynomially");
  }
}

namespace {

// num/den with the division distributed over num's terms, so factors shared
// between a term and den cancel structurally (keeps Phi compact: the
// slope-free part of the solve does not drag the slope denominator along).
Expr divide_distributing(const Expr& num, const Expr& den) {
  Expr inv = Expr::pow(den, -1);
  if (num.kind() == ExprKind::sum) {
    std::vector<Expr> terms;
    terms.reserve(num.children().size());
    for (const Expr& t : num.children()) terms.push_back(t * inv);
    return Expr::add(std::move(terms));
  }
  return num * inv;
}

}  // namespace

Expr solve_branch_for(const Expr& E, const std::string& var, SolveBranch branch) {
  VarQuadratic q = extract_quadratic(E, var);
  bool quadratic = !is_zero_expr(q.a2);
  if (branch == SolveBranch::linear) {
    if (quadratic)
      fail(errc::branch_invalid, "linear branch requested but '" + var + "' is quadratic");
    if (is_zero_expr(q.a1))
      fail(errc::branch_invalid, "'" + var + "' does not appear in the equation");
    return divide_distributing(-q.a0, q.a1);
  }
  if (!quadratic)
    fail(errc::branch_invalid, "quadratic branch requested but '" + var + "' is linear");
  Rational sign = branch == SolveBranch::quadratic_positive ? Rational(1) : Rational(-1);
  if (is_zero_expr(q.a1)) {
    // +- sqrt(-a0/a2): stays a plain sqrt of a quotient
    return Expr::constant(sign) * Expr::sqrt(divide_distributing(-q.a0, q.a2));
  }
  Expr disc = q.a1 * q.a1 - Expr::constant(4) * q.a2 * q.a0;
  return divide_distributing(-q.a1 + Expr::constant(sign) * Expr::sqrt(disc),
                             Expr::constant(2) * q.a2);
}

Rational resolve_linear_unknown(const std::function<Rational(const Rational&)>& numerator_at_fold) {
  Rational A = numerator_at_fold(Rational(0));
  Rational B = numerator_at_fold(Rational(1));
  Rational C = numerator_at_fold(Rational(2));
  if (C != B + B - A) fail(errc::not_affine, "third probe violates affineness");
  Rational slope = B - A;
  if (slope.is_zero()) {
    if (A.is_zero()) fail(errc::indeterminate, "numerator vanishes for every parameter value");
    fail(errc::no_solution, "numerator cannot vanish for any parameter value");
  }
  return -A / slope;
}

FoldCancellation cancel_at_fold(const RatFuncQ& at0, const RatFuncQ& at1, const RatFuncQ& at2,
                                const Rational& fold) {
  PolyQ D = lcm(lcm(at0.den(), at1.den()), at2.den());
  PolyQ n0 = at0.num() * exact_divide(D, at0.den());
  PolyQ n1 = at1.num() * exact_divide(D, at1.den());
  PolyQ n2 = at2.num() * exact_divide(D, at2.den());
  if (n2 != n1 + n1 - n0)
    fail(errc::nonlinear_unknown, "cancellation condition is not affine in the unknown");
  PolyQ delta = n1 - n0;

  // multiplicity of (x - fold) in the common denominator
  PolyQ lin = PolyQ::from_coeffs({-fold, Rational(1)});
  int m = 0;
  {
    PolyQ d = D;
    while (!d.is_zero() && d(fold).is_zero()) {
      d = deflate_root(d, fold);
      ++m;
    }
  }
  if (m == 0)
    fail(errc::indeterminate, "no singularity at the fold; parameter undetermined");

  // With a consistent prefix both numerator parts carry the fold root at
  // multiplicity >= m-1 already; the unknown lifts it to m.
  PolyQ n0_red = n0, delta_red = delta;
  for (int i = 0; i < m - 1; ++i) {
    if (!n0_red.is_zero() && n0_red(fold).is_zero())
      n0_red = deflate_root(n0_red, fold);
    else if (!n0_red.is_zero())
      fail(errc::no_cancellation, "fold multiplicity deficit in the cancellation numerator");
    if (!delta_red.is_zero() && delta_red(fold).is_zero())
      delta_red = deflate_root(delta_red, fold);
    else if (!delta_red.is_zero())
      fail(errc::no_cancellation, "fold multiplicity deficit in the parameter slope");
  }
  Rational A = n0_red.is_zero() ? Rational(0) : n0_red(fold);
  Rational B = delta_red.is_zero() ? Rational(0) : delta_red(fold);
  if (B.is_zero()) {
    if (A.is_zero()) fail(errc::indeterminate, "numerator vanishes for every parameter value");
    fail(errc::no_solution, "numerator cannot vanish at the fold for any parameter value");
  }

  FoldCancellation out;
  out.parameter = -A / B;
  out.common_denominator = D;
  out.fold_multiplicity = m;
  out.presub_numerator = n0 + out.parameter * delta;
  {
    PolyQ check = out.presub_numerator;
    for (int i = 0; i < m; ++i) {
      if (check.is_zero()) break;
      if (!check(fold).is_zero())
        fail(errc::no_cancellation, "substituted numerator does not vanish at the fold");
      check = deflate_root(check, fold);
    }
  }
  out.canceled = RatFuncQ(out.presub_numerator, D);
  if (out.canceled.den()(fold).is_zero())
    fail(errc::no_cancellation, "pole at the fold survives the cancellation");
  return out;
}

namespace {

struct ResidualContext {
  const Expr& f;
  const Expr& g;
  const SystemVars& vars;
};

// residual series of f(x,y,c,eps) dy/dx - eps g(x,y,c,eps) at the given
// truncation order
ParamSeries residual_series(const ResidualContext& ctx, const std::vector<RatFuncQ>& ycoeffs,
                            const std::vector<Rational>& ccoeffs, std::size_t order) {
  ParamSeries yser(order), cser(order);
  for (std::size_t i = 0; i <= order && i < ycoeffs.size(); ++i) yser.at(i) = ycoeffs[i];
  for (std::size_t i = 0; i <= order && i < ccoeffs.size(); ++i)
    cser.at(i) = RatFuncQ::from_rational(ccoeffs[i]);

  SeriesOps<RatFuncQ> ops{order};
  std::map<std::string, ParamSeries> bind{
      {ctx.vars.x, ParamSeries::constant(RatFuncQ::x(), order)},
      {ctx.vars.y, yser},
      {ctx.vars.c, cser},
      {ctx.vars.eps, ParamSeries::expansion_var(order)},
  };
  ParamSeries fs = eval_in(ctx.f, bind, ops);
  ParamSeries gs = eval_in(ctx.g, bind, ops);
  ParamSeries yprime = yser.map([](const RatFuncQ& r) { return r.derivative(); });
  return fs * yprime - ParamSeries::expansion_var(order) * gs;
}

}  // namespace

namespace {

// Exact polynomial square root, if one exists.
std::optional<PolyQ> poly_sqrt(const PolyQ& p) {
  if (p.is_zero()) return PolyQ();
  if (p.degree() % 2 != 0) return std::nullopt;
  auto rational_sqrt = [](const Rational& q) -> std::optional<Rational> {
    if (q.sign() < 0) return std::nullopt;
    if (!mpz_perfect_square_p(q.num().get_mpz_t()) ||
        !mpz_perfect_square_p(q.den().get_mpz_t()))
      return std::nullopt;
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), q.num().get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), q.den().get_mpz_t());
    return Rational(rn, rd);
  };
  int n = p.degree() / 2;
  auto lead = rational_sqrt(p.leading());
  if (!lead) return std::nullopt;
  std::vector<Rational> s(n + 1, Rational(0));
  s[n] = *lead;
  for (int k = n - 1; k >= 0; --k) {
    Rational acc(0);
    for (int i = k + 1; i <= n; ++i) {
      int j = n + k - i;
      if (j > n || j < 0 || j <= k) continue;
      acc += s[i] * s[j];
    }
    // coefficient of x^{n+k} in s^2 is 2 s_n s_k + sum of known products
    Rational target = p.coeff(n + k);
    s[k] = (target - acc) / (Rational(2) * s[n]);
  }
  PolyQ cand = PolyQ::from_coeffs(std::move(s));
  if (cand * cand == p) return cand;
  return std::nullopt;
}

std::optional<RatFuncQ> ratfunc_sqrt(const RatFuncQ& f) {
  auto sn = poly_sqrt(f.num());
  if (!sn) return std::nullopt;
  auto sd = poly_sqrt(f.den());
  if (!sd) return std::nullopt;
  return RatFuncQ(*sn, *sd);
}

// Critical-manifold branch as a reduced rational function: solves
// f(x, y, 0) = 0 for y. Quadratic branches require the discriminant to be a
// perfect square over Q(x); "positive" selects the root with + in front of
// the square root whose leading coefficient is positive.
RatFuncQ rational_branch(const Expr& f0, const SystemVars& vars, SolveBranch branch) {
  VarQuadratic q = extract_quadratic(f0, vars.y);
  auto lift = [&](const Expr& e) -> RatFuncQ {
    try {
      return to_ratfunc(e, vars.x);
    } catch (const error& err) {
      if (err.code() == errc::not_rational)
        fail(errc::branch_invalid,
             std::string("critical-manifold branch is not rational in '") + vars.x +
                 "': " + err.what());
      throw;
    }
  };
  RatFuncQ a0 = lift(q.a0), a1 = lift(q.a1), a2 = lift(q.a2);
  if (a2.is_zero()) {
    if (branch != SolveBranch::linear)
      fail(errc::branch_invalid, "quadratic branch requested but the equation is linear");
    if (a1.is_zero()) fail(errc::branch_invalid, "dependent variable absent");
    return -a0 / a1;
  }
  if (branch == SolveBranch::linear)
    fail(errc::branch_invalid, "linear branch requested but the equation is quadratic");
  RatFuncQ disc = a1 * a1 - RatFuncQ::from_rational(Rational(4)) * a2 * a0;
  auto s = ratfunc_sqrt(disc);
  if (!s)
    fail(errc::not_rational, "discriminant of the critical branch is not a perfect square");
  RatFuncQ root = *s;
  if (branch == SolveBranch::quadratic_negative) root = -root;
  return (-a1 + root) / (RatFuncQ::from_rational(Rational(2)) * a2);
}

}  // namespace

CanardExpansion classical_canard_expansion(const Expr& f, const Expr& g, const SystemVars& vars,
                                           const Rational& fold_x, int order,
                                           SolveBranch branch) {
  if (order < 1) fail(errc::internal, "expansion order must be >= 1");

  Expr f0 = substitute(f, {{vars.eps, Expr::constant(0)}});
  RatFuncQ y0 = rational_branch(f0, vars, branch);

  Expr f_y = differentiate(f, vars.y);
  auto linearization = [&](const Rational& c_probe) -> RatFuncQ {
    std::map<std::string, RatFuncQ> bind{
        {vars.x, RatFuncQ::x()},
        {vars.y, y0},
        {vars.c, RatFuncQ::from_rational(c_probe)},
        {vars.eps, RatFuncQ()},
    };
    return eval_ratfunc(f_y, bind) * y0.derivative();
  };

  ResidualContext ctx{f, g, vars};
  CanardExpansion out;
  out.fold_x = fold_x;
  out.y.push_back(y0);

  // c_j is fixed by the cancellation at order j+1, so reaching c_order takes
  // the y-series one order further.
  for (int k = 1; k <= order + 1; ++k) {
    RatFuncQ cand[3];
    for (long t = 0; t < 3; ++t) {
      std::vector<Rational> cc = out.c;
      cc.resize(k, Rational(0));
      cc[k - 1] = Rational(t);
      ParamSeries R = residual_series(ctx, out.y, cc, k);
      for (int j = 0; j < k; ++j)
        if (!R.at(j).is_zero())
          fail(errc::nonlinear_unknown,
               "order-" + std::to_string(j) + " residual nonzero: the sequential "
               "one-unknown-per-order structure does not hold");
      RatFuncQ L = linearization(Rational(t));
      if (L.is_zero()) fail(errc::no_cancellation, "degenerate linearization at order " +
                                                        std::to_string(k));
      cand[t] = -R.at(k) / L;
    }
    try {
      FoldCancellation fc = cancel_at_fold(cand[0], cand[1], cand[2], fold_x);
      out.c.push_back(fc.parameter);
      out.y.push_back(fc.canceled);
      out.presub_numerators.push_back(fc.presub_numerator);
    } catch (const error& err) {
      if (err.code() == errc::indeterminate || err.code() == errc::no_solution)
        fail(errc::no_cancellation,
             "order " + std::to_string(k) + ": " + err.what());
      throw;
    }
  }
  return out;
}

ParamSeries expansion_residual(const CanardExpansion& ex, const Expr& f, const Expr& g,
                               const SystemVars& vars, int order) {
  ResidualContext ctx{f, g, vars};
  return residual_series(ctx, ex.y, ex.c, order);
}

}  // namespace canard
