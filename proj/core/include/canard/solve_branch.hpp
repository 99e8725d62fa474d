#pragma once

#include <string>

#include "canard/expr.hpp"

namespace canard {

enum class SolveBranch { linear, quadratic_positive, quadratic_negative };

SolveBranch parse_branch(const std::string& text);
std::string branch_name(SolveBranch b);

/// Mathematical-zero test: structural zero after canonicalization, or exact
/// zero at deterministic pseudorandom rational points (Schwartz-Zippel
/// style). Falls back to a numeric tolerance when sqrt nodes block exact
/// evaluation.
bool is_zero_expr(const Expr& e);

/// E as a polynomial in `var`: E = a2 var^2 + a1 var + a0. Throws
/// DegreeTooHigh when var appears at degree >= 3 or inside a denominator or
/// radicand.
struct VarQuadratic {
  Expr a0, a1, a2;
};
VarQuadratic extract_quadratic(const Expr& E, const std::string& var);

/// Solves E = 0 for `var` on the chosen branch: -a0/a1 for the linear
/// branch, (-a1 +- sqrt(a1^2 - 4 a2 a0))/(2 a2) for the quadratic ones
/// (simplified to +-sqrt(-a0/a2) when a1 vanishes, which keeps the result a
/// plain sqrt of a quotient). BranchInvalid when the requested branch does
/// not match the actual degree.
Expr solve_branch_for(const Expr& E, const std::string& var, SolveBranch branch);

}  // namespace canard
