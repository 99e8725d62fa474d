#include "canard/asymptotics.hpp"

#include <algorithm>

namespace canard {

namespace {

using KE = RatFuncQ;       // rational functions of eps
using RFE = RatFunc<KE>;   // rational functions of x over Q(eps)

bool has_sqrt(const Expr& e) {
  if (e.kind() == ExprKind::sqrt_) return true;
  for (const Expr& k : e.children())
    if (has_sqrt(k)) return true;
  return false;
}

// P(x, eps) evaluated at x = u(eps), truncated to the order of u.
RationalSeries eval_bivariate(const Poly<KE>& P, const RationalSeries& u) {
  RationalSeries acc(u.order());
  for (int i = P.degree(); i >= 0; --i) acc = acc * u + taylor_series(P.coeff(i), u.order());
  return acc;
}

// P(x, eps) as an eps-series whose coefficients are polynomials in x.
ParamSeries to_series_in_x(const Poly<KE>& P, std::size_t ord) {
  std::vector<RationalSeries> taylors;
  taylors.reserve(P.coeffs().size());
  for (const KE& c : P.coeffs()) taylors.push_back(taylor_series(c, ord));
  ParamSeries out(ord);
  for (std::size_t j = 0; j <= ord; ++j) {
    std::vector<Rational> cj;
    cj.reserve(taylors.size());
    for (const RationalSeries& t : taylors) cj.push_back(t.at(j));
    out.at(j) = RatFuncQ(PolyQ::from_coeffs(std::move(cj)));
  }
  return out;
}

ParamSeries lift(const RationalSeries& s) {
  ParamSeries out(s.order());
  for (std::size_t i = 0; i <= s.order(); ++i) out.at(i) = RatFuncQ::from_rational(s.at(i));
  return out;
}

PolyQ family_at(const Poly<KE>& P, const Rational& eps) {
  std::vector<Rational> c;
  c.reserve(P.coeffs().size());
  for (const KE& k : P.coeffs()) c.push_back(k(eps));
  return PolyQ::from_coeffs(std::move(c));
}

// num/den as a power series when both carry a common eps^v factor.
RationalSeries series_divide_with_valuation(const RationalSeries& num,
                                            const RationalSeries& den) {
  std::size_t ord = std::min(num.order(), den.order());
  std::size_t v = 0;
  while (v <= ord && den.at(v).is_zero()) ++v;
  if (v > ord)
    fail(errc::no_cancellation, "parameter slope vanishes identically at the tracked root");
  for (std::size_t j = 0; j < v; ++j)
    if (!num.at(j).is_zero())
      fail(errc::no_cancellation, "parameter series has a pole in the perturbation");
  RationalSeries n2(ord - v), d2(ord - v);
  for (std::size_t i = 0; i + v <= ord; ++i) {
    n2.at(i) = num.at(i + v);
    d2.at(i) = den.at(i + v);
  }
  return n2 * d2.reciprocal();
}

struct AffineIterate {
  Poly<KE> D, N0, dN;  // y(c) = (N0 + c dN)/D over Q(eps)
};

AffineIterate apply_map_symbolic(const IterationMap& map, const RFE& prev) {
  RFE dp = prev.derivative();
  RFE yt[3];
  for (long t = 0; t < 3; ++t) {
    std::map<std::string, RFE> bind{
        {map.names.indep, RFE::x()},
        {map.names.slope, dp},
        {map.names.param, RFE(KE::from_rational(Rational(t)))}};
    if (!map.names.eps.empty()) bind.emplace(map.names.eps, RFE(KE::x()));
    yt[t] = eval_ratfunc(map.phi, bind);
  }
  if (yt[2] != yt[1] + yt[1] - yt[0])
    fail(errc::nonlinear_unknown, "iterate is not affine in the parameter");
  AffineIterate out;
  out.D = lcm(lcm(yt[0].den(), yt[1].den()), yt[2].den());
  out.N0 = yt[0].num() * exact_divide(out.D, yt[0].den());
  out.dN = yt[1].num() * exact_divide(out.D, yt[1].den()) - out.N0;
  return out;
}

// Exact rational roots (in the bracket) of the eps -> 0 limit of D that
// remain roots for symbolic eps.
struct UniformRoots {
  std::vector<Rational> uniform;
  std::vector<RealRoot> limit_roots;  // roots of D(., 0) in the bracket
};

UniformRoots bracket_roots(const Poly<KE>& D, const Rational& lo, const Rational& hi) {
  UniformRoots out;
  PolyQ D0 = family_at(D, Rational(0));
  if (D0.degree() < 1) return out;
  out.limit_roots = real_roots(D0, lo, hi);
  for (const RealRoot& r : out.limit_roots) {
    if (!r.exact) continue;
    if (field_traits<KE>::is_zero(D(KE::from_rational(r.value))))
      out.uniform.push_back(r.value);
  }
  return out;
}

}  // namespace

RationalSeries poly_root_series(const Poly<KE>& P, const Rational& x0, std::size_t order) {
  {
    RationalSeries probe = RationalSeries::constant(x0, 0);
    if (!eval_bivariate(P, probe).at(0).is_zero())
      fail(errc::internal, "x0 is not a root of P(., 0)");
  }
  RationalSeries u(order);
  u.at(0) = x0;
  for (std::size_t k = 1; k <= order; ++k) {
    Rational vals[3];
    for (long t = 0; t < 3; ++t) {
      u.at(k) = Rational(t);
      RationalSeries r = eval_bivariate(P, u);
      for (std::size_t j = 0; j < k; ++j)
        if (!r.at(j).is_zero())
          fail(errc::internal, "root series lost consistency at order " + std::to_string(j));
      vals[t] = r.at(k);
    }
    if (vals[2] != vals[1] + vals[1] - vals[0])
      fail(errc::internal, "root series coefficient equation is not affine");
    Rational slope = vals[1] - vals[0];
    if (slope.is_zero())
      fail(errc::internal, "x0 is not a simple root of P(., 0)");
    u.at(k) = -vals[0] / slope;
  }
  return u;
}

std::vector<IterateCSeries> iterative_asymptotics(const IterationMap& map, int k_max,
                                                  int order) {
  if (map.names.eps.empty())
    fail(errc::internal, "iterative asymptotics needs a declared perturbation symbol");
  if (has_sqrt(map.phi) || has_sqrt(map.seed))
    fail(errc::sqrt_present, "iterative asymptotics requires a sqrt-free map");
  if (order < 0 || k_max < 1) fail(errc::internal, "bad order or k_max");
  const std::size_t ord = static_cast<std::size_t>(order) + 1;

  std::vector<IterateCSeries> out;
  RFE y = eval_ratfunc(map.seed, std::map<std::string, RFE>{{map.names.indep, RFE::x()}});
  bool series_stage = false;
  ParamSeries yser(ord);
  Rational fold;
  bool fold_known = false;

  for (int k = 1; k <= k_max; ++k) {
    if (!series_stage) {
      AffineIterate it = apply_map_symbolic(map, y);
      UniformRoots roots = bracket_roots(it.D, map.bracket_lo, map.bracket_hi);

      if (roots.uniform.size() == 1) {
        // the singular abscissa does not move with eps: pin exactly over Q(eps)
        const Rational& rho = roots.uniform[0];
        fold = rho;
        fold_known = true;
        KE A = it.N0(KE::from_rational(rho));
        KE B = it.dN(KE::from_rational(rho));
        if (B.is_zero())
          fail(errc::no_cancellation,
               "iterate " + std::to_string(k) + ": no parameter dependence at the root");
        KE cstar = (KE() - A) / B;
        RationalSeries ctay = taylor_series(cstar, ord);
        IterateCSeries rec{k, {}, "exact"};
        if (k == 1) {
          rec.c = {ctay.at(0)};  // a first iterate fixes only the leading order
        } else {
          for (int j = 0; j <= order; ++j) rec.c.push_back(ctay.at(j));
        }
        out.push_back(std::move(rec));
        y = RFE(it.N0 + cstar * it.dN, it.D);
        continue;
      }

      // the root moves with eps: expand it as a series and switch to the
      // order-by-order stage for later iterates
      const RealRoot* anchor = nullptr;
      for (const RealRoot& r : roots.limit_roots)
        if (r.exact && r.multiplicity == 1) {
          if (anchor) fail(errc::multiple_roots_ambiguous,
                           "several candidate roots at eps -> 0 inside the bracket");
          anchor = &r;
        }
      if (!anchor)
        fail(errc::no_cancellation,
             "iterate " + std::to_string(k) + ": no rational simple root at eps -> 0");
      fold = anchor->value;
      fold_known = true;

      RationalSeries xser = poly_root_series(it.D, fold, ord);
      // the numerator and the parameter slope may share an eps^v factor;
      // determine v, then redo the expansion with enough extra orders
      std::size_t v = 0;
      {
        RationalSeries probe = eval_bivariate(it.dN, xser);
        while (v <= probe.order() && probe.at(v).is_zero()) ++v;
        if (v > probe.order())
          fail(errc::no_cancellation,
               "parameter slope vanishes identically at the tracked root");
      }
      if (v > 0) xser = poly_root_series(it.D, fold, ord + v);
      RationalSeries n0s = eval_bivariate(it.N0, xser);
      RationalSeries dns = eval_bivariate(it.dN, xser);
      RationalSeries cser = series_divide_with_valuation(RationalSeries(n0s.order()) - n0s, dns);
      IterateCSeries rec{k, {}, "root-expansion"};
      for (int j = 0; j <= order; ++j) rec.c.push_back(cser.at(j));
      out.push_back(std::move(rec));

      yser = (to_series_in_x(it.N0, ord) + lift(cser) * to_series_in_x(it.dN, ord)) *
             to_series_in_x(it.D, ord).reciprocal();
      series_stage = true;
      continue;
    }

    // order-by-order cancellation at the fold
    if (!fold_known) fail(errc::internal, "fold abscissa unknown in series stage");
    ParamSeries dys = yser.map([](const RatFuncQ& r) { return r.derivative(); });
    SeriesOps<RatFuncQ> ops{ord};
    auto phi_series = [&](const std::vector<Rational>& cc, std::size_t live,
                          const Rational& probe) {
      ParamSeries cs(ord);
      for (std::size_t i = 0; i < cc.size() && i <= ord; ++i)
        cs.at(i) = RatFuncQ::from_rational(cc[i]);
      if (live <= ord) cs.at(live) = RatFuncQ::from_rational(probe);
      std::map<std::string, ParamSeries> bind{
          {map.names.indep, ParamSeries::constant(RatFuncQ::x(), ord)},
          {map.names.slope, dys},
          {map.names.param, cs},
          {map.names.eps, ParamSeries::expansion_var(ord)}};
      return eval_in(map.phi, bind, ops);
    };

    std::vector<Rational> cc;
    for (std::size_t j = 1; j <= ord; ++j) {
      RatFuncQ W[3];
      for (long t = 0; t < 3; ++t)
        W[t] = phi_series(cc, j - 1, Rational(t)).at(j);
      FoldCancellation fc = cancel_at_fold(W[0], W[1], W[2], fold);
      cc.push_back(fc.parameter);
    }
    IterateCSeries rec{k, {}, "order-by-order"};
    for (int j = 0; j <= order; ++j) rec.c.push_back(cc[j]);
    out.push_back(std::move(rec));

    yser = phi_series(cc, ord + 1, Rational(0));  // live slot beyond truncation: fully pinned
  }
  return out;
}

ExistenceBound select_existence_bound(const Poly<KE>& family) {
  auto collisions = discriminant_vanishes(family);
  std::sort(collisions.begin(), collisions.end(), [](const CollisionPoint& a,
                                                     const CollisionPoint& b) {
    return a.parameter.mid < b.parameter.mid;
  });
  for (const CollisionPoint& col : collisions) {
    if (col.parameter.mid < -1e-12) continue;
    if (!col.parameter.exact) continue;  // the bound is reported exactly or not at all
    const Rational& eps_star = col.parameter.value;
    Rational delta = (Rational(1) + eps_star.abs()) / Rational(1000000);
    PolyQ before = family_at(family, eps_star - delta);
    PolyQ after = family_at(family, eps_star + delta);
    for (const RealRoot& ab : col.abscissae) {
      if (!ab.exact && ab.multiplicity < 1) continue;
      Rational xi = ab.exact ? ab.value : simplest_in_interval(ab.lo, ab.hi);
      Rational h = (Rational(1) + xi.abs()) / Rational(64);
      auto count = [&](const PolyQ& p) {
        if (p.degree() < 1) return 0;
        int n = 0;
        for (const RealRoot& r : real_roots(p, xi - h, xi + h)) n += r.multiplicity;
        return n;
      };
      int cb = count(before), ca = count(after);
      if (cb - ca == 2 || ca - cb == 2) {
        ExistenceBound out;
        out.critical_eps = col.parameter;
        out.abscissa = ab;
        out.denominator_family = family;
        return out;
      }
    }
  }
  fail(errc::no_collision, "no nonnegative critical perturbation size with a root collision");
}

ExistenceBound existence_bound(const IterationMap& map) {
  if (has_sqrt(map.phi) || has_sqrt(map.seed))
    fail(errc::sqrt_present, "existence bound requires a sqrt-free map");

  RFE y = eval_ratfunc(map.seed, std::map<std::string, RFE>{{map.names.indep, RFE::x()}});
  // iterate 1: pin exactly (the singular abscissa must not move with eps)
  AffineIterate it1 = apply_map_symbolic(map, y);
  UniformRoots r1 = bracket_roots(it1.D, map.bracket_lo, map.bracket_hi);
  if (r1.uniform.size() != 1)
    fail(errc::no_collision, "first iterate has no eps-uniform singular root to pin");
  KE A = it1.N0(KE::from_rational(r1.uniform[0]));
  KE B = it1.dN(KE::from_rational(r1.uniform[0]));
  if (B.is_zero()) fail(errc::no_collision, "first iterate has no parameter dependence");
  KE cstar = (KE() - A) / B;
  y = RFE(it1.N0 + cstar * it1.dN, it1.D);

  AffineIterate it2 = apply_map_symbolic(map, y);
  return select_existence_bound(it2.D);
}

}  // namespace canard
