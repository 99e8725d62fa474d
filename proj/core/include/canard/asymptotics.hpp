#pragma once

#include "canard/iteration.hpp"
#include "canard/series.hpp"

namespace canard {

/// Expansion of the canard parameter produced by one iterate, in powers of
/// the perturbation symbol. `route` records how it was obtained: "exact"
/// (parameter solved in closed form over Q(eps)), "root-expansion" (Taylor
/// expansion of the moving denominator root), or "order-by-order"
/// (singularity cancellation per epsilon order at the fold).
struct IterateCSeries {
  int iterate = 0;
  std::vector<Rational> c;
  std::string route;
};

/// Runs the iteration with the perturbation symbol carried symbolically and
/// returns the per-iterate parameter expansions through the given order.
/// Requires a sqrt-free (rational) map.
std::vector<IterateCSeries> iterative_asymptotics(const IterationMap& map, int k_max, int order);

/// Critical perturbation size at which the tracked iterate-2 denominator
/// roots collide (double root), plus the collision abscissa.
struct ExistenceBound {
  RealRoot critical_eps;
  RealRoot abscissa;
  Poly<RatFuncQ> denominator_family;  // iterate-2 denominator as a family in eps
};
ExistenceBound existence_bound(const IterationMap& map);

/// Selection core of existence_bound, exposed for direct use on a polynomial
/// family: smallest nonnegative real parameter value at which a pair of real
/// roots is created or destroyed (|local root count change| = 2).
ExistenceBound select_existence_bound(const Poly<RatFuncQ>& family);

/// Taylor coefficients of the root branch x(eps) of P(x, eps) through a
/// simple rational root x0 of P(., 0).
RationalSeries poly_root_series(const Poly<RatFuncQ>& P, const Rational& x0, std::size_t order);

}  // namespace canard
