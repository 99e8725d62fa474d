#pragma once

#include <vector>

#include "canard/ratfunc.hpp"

namespace canard {

/// One isolated real root: an isolating interval [lo, hi] refined to the
/// requested width, a double midpoint, the multiplicity from the squarefree
/// decomposition, and the exact value when the root is rational.
struct RealRoot {
  Rational lo, hi;
  double mid = 0.0;
  int multiplicity = 1;
  bool exact = false;
  Rational value;
};

struct RootOptions {
  Rational width = Rational(1, 1000000000000L);  // refinement width, 1e-12
  bool recognize_rational = true;
};

/// All real roots of p in [lo, hi]: Descartes sign-variation bisection on the
/// squarefree factors, bisection refinement, multiplicities attached.
std::vector<RealRoot> real_roots(const PolyQ& p, const Rational& lo, const Rational& hi,
                                 const RootOptions& opts = {});

/// All real roots (interval from the Cauchy bound).
std::vector<RealRoot> real_roots(const PolyQ& p, const RootOptions& opts = {});

/// Monic gcd.
PolyQ poly_gcd(const PolyQ& a, const PolyQ& b);

/// Exact deflation by (x - root); throws InexactDeflation when (x - root)
/// does not divide p.
PolyQ deflate_root(const PolyQ& p, const Rational& root);

/// Numeric deflation by (x - root) with a residual report; throws
/// InexactDeflation when the relative residual exceeds tol (the chosen root
/// was not a true root of p).
struct NumericDeflation {
  PolyD quotient;
  double residual;
};
NumericDeflation deflate_root(const PolyD& p, double root, double tol = 1e-9);

/// Sign-change scan over uniform panels followed by bisection refinement.
/// Only simple (sign-changing) roots are found, which is what the numeric
/// iteration mode needs.
std::vector<double> scan_roots(const PolyD& p, double lo, double hi, int panels = 4096,
                               double tol = 1e-12);

/// Parameter values where a polynomial family p(x; s) acquires a multiple
/// root, via resultant(p, dp/dx) = 0 over the parameter field, filtered to
/// the real solutions. The family is a polynomial in x whose coefficients are
/// rational functions of the parameter.
struct CollisionPoint {
  RealRoot parameter;
  std::vector<RealRoot> abscissae;        // exact-parameter case
  std::vector<double> abscissae_approx;   // irrational-parameter case
};
std::vector<CollisionPoint> discriminant_vanishes(const Poly<RatFuncQ>& family);

}  // namespace canard
