#pragma once

#include <optional>

#include "canard/expansion.hpp"

namespace canard {

struct SystemNames {
  std::string indep;  // x or T
  std::string dep;    // y or X
  std::string param;  // c or r
  std::string slope = "p";
  std::string eps;    // empty unless the perturbation symbol is carried
};

/// The iteration y_k = Phi(x, y'_{k-1}, c) with its isocline seed and the
/// fold bracket used to select singular roots.
struct IterationMap {
  SystemNames names;
  Expr phi;   // in (indep, slope, param [, eps])
  Expr seed;  // in (indep)
  Rational bracket_lo, bracket_hi;
};

/// Solves F * d(dep)/d(indep) = G algebraically for dep on the chosen branch
/// (dep must appear at degree <= 2 in F*p - G) and packages the map with the
/// isocline seed.
IterationMap solve_for_dependent(const Expr& F, const Expr& G, const SystemNames& names,
                                 SolveBranch branch, const Rational& bracket_lo,
                                 const Rational& bracket_hi);

/// The infinity-isocline: solves F(indep, dep) = 0 for dep on the chosen
/// branch. The result may reference only indep.
Expr isocline_seed(const Expr& F, const SystemNames& names, SolveBranch branch);

enum class IterationMode { exact, numeric };

/// One candidate produced by a step: the iterate with the parameter pinned,
/// the denominator carrying the singularity, the canceled root and parameter
/// value, and certificates/diagnostics. Exactly one representation is
/// populated: exact rational function, double-coefficient rational function,
/// or symbolic expression (sqrt-bearing systems).
struct CanardIterate {
  int k = 0;

  std::optional<RatFuncQ> rep_exact;
  std::optional<RatFuncD> rep_numeric;
  std::optional<Expr> rep_symbolic;

  std::optional<PolyQ> den_exact;
  std::optional<PolyD> den_numeric;
  std::optional<Expr> den_symbolic;

  bool resolved = false;
  double root = 0.0;
  double root_halfwidth = 0.0;
  bool root_is_exact = false;
  Rational root_exact;

  bool c_is_exact = false;
  Rational c_exact;
  double c_value = 0.0;
  double c_error_bound = 0.0;

  double certificate_residual = 0.0;  // |numerator(x*, c*)| relative; 0 exact
  std::size_t expression_size = 0;
  std::vector<std::string> diagnostics;

  std::string render(const std::string& var) const;
};

struct StepOptions {
  IterationMode mode = IterationMode::exact;
  int scan_panels = 4096;
  double root_tol = 1e-12;
  std::size_t node_budget = 100000;
};

/// The seed as a pseudo-iterate (k = 0, parameter-free).
CanardIterate seed_iterate(const IterationMap& map, IterationMode mode);

/// One iteration step: apply Phi to the previous iterate with the parameter
/// symbolic, locate the denominator roots inside the fold bracket, and cancel
/// each one by choosing the parameter; returns one candidate per root. An
/// empty bracket yields a single unresolved candidate (NoSingularityInBracket
/// is reported, not fatal).
std::vector<CanardIterate> step(const IterationMap& map, const CanardIterate& prev,
                                const StepOptions& opts);

struct RunResult {
  std::vector<std::vector<CanardIterate>> steps;
  std::string stop_reason;  // empty when k_max was reached
};

/// Runs the iteration, continuing through the unique resolved candidate per
/// step; stops early (with the reason recorded) on expression-budget
/// exhaustion, a step with no resolvable singularity, or an ambiguous
/// continuation (several resolved candidates).
RunResult run_iteration(const IterationMap& map, int k_max, const StepOptions& opts);

}  // namespace canard
