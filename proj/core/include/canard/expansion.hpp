#pragma once

#include <functional>

#include "canard/real_roots.hpp"
#include "canard/series.hpp"
#include "canard/solve_branch.hpp"

namespace canard {

/// Solves N(c) = 0 for the unique c when N is affine in c. Probes at 0 and 1
/// give c = -N(0)/(N(1) - N(0)); a third probe at 2 must satisfy
/// N(2) = 2 N(1) - N(0) exactly or the solve is rejected as NotAffine.
Rational resolve_linear_unknown(const std::function<Rational(const Rational&)>& numerator_at_fold);

/// Result of canceling the fold singularity of an iterate/series coefficient
/// that is affine in one unknown parameter. The three arguments are the
/// coefficient evaluated at parameter probes 0, 1, 2.
struct FoldCancellation {
  Rational parameter;       // resolved unknown
  RatFuncQ canceled;        // coefficient with the parameter substituted, reduced
  PolyQ presub_numerator;   // numerator over the common denominator (certificate:
                            // (x - fold)^multiplicity divides it exactly)
  PolyQ common_denominator;
  int fold_multiplicity;
};
FoldCancellation cancel_at_fold(const RatFuncQ& at0, const RatFuncQ& at1, const RatFuncQ& at2,
                                const Rational& fold);

struct SystemVars {
  std::string x, y, c, eps;
};

/// The Poincare-Lindstedt canard-point expansion: parameter coefficients
/// c_0..c_K and trajectory coefficients y_0..y_{K+1} with every y_k finite at
/// the fold.
struct CanardExpansion {
  std::vector<Rational> c;
  std::vector<RatFuncQ> y;
  Rational fold_x;
  std::vector<PolyQ> presub_numerators;  // per order k >= 1
};

/// Order-by-order singularity cancellation for the slow-fast form
/// xdot = f(x,y,c,eps), ydot = eps g(x,y,c,eps), carried to c-order K
/// (coefficients c_0..c_K). The critical
/// branch y_0 solves f(x, y, c, 0) = 0 and must not depend on c; each order's
/// cancellation condition must be affine in the one live unknown c_{k-1}.
CanardExpansion classical_canard_expansion(const Expr& f, const Expr& g, const SystemVars& vars,
                                           const Rational& fold_x, int order,
                                           SolveBranch branch);

/// Residual series of the computed expansion; identically zero through the
/// expansion order when the expansion is correct.
ParamSeries expansion_residual(const CanardExpansion& ex, const Expr& f, const Expr& g,
                               const SystemVars& vars, int order);

}  // namespace canard
