#pragma once

#include <optional>

#include "canard/asymptotics.hpp"
#include "canard/limit_cycle.hpp"

namespace canard {

/// Parsed model file. The format is line-oriented `key = value` with
/// sections [variables], [constants], [system], [task]; expression strings
/// are double-quoted and use the expression grammar; constants are exact
/// rationals; '#' starts a comment. Exactly one of {(F, G), (phi, seed)}
/// defines the system.
struct ModelFile {
  std::string name;

  std::string independent, dependent, parameter;
  std::string epsilon;  // empty when not declared
  std::string slope = "p";

  std::map<std::string, Rational> constants;

  std::optional<std::string> f_text, g_text;
  std::optional<std::string> phi_text, seed_text;
  SolveBranch branch = SolveBranch::linear;

  Rational bracket_lo, bracket_hi;
  int k_max = 3;
  int series_order = 3;
  double explode_lo = 0, explode_hi = 0;
  double explode_tol = 1e-6;
  std::optional<double> explode_threshold;
  State2 seed_state{0, 0};
  double transient = 500;
  double window = 200;

  static ModelFile parse_file(const std::string& path);
  static ModelFile parse_text(const std::string& text, const std::string& origin = "<string>");
  std::string serialize() const;

  bool operator==(const ModelFile& o) const;

  /// Iteration map with constants substituted; with symbolic_eps the
  /// perturbation symbol stays free (required for expand), otherwise its
  /// value is taken from [constants].
  IterationMap iteration_map(bool symbolic_eps) const;

  /// Planar system for simulation: state (independent, dependent) with
  /// right-hand sides (F, G); constants and the perturbation value
  /// substituted, the bifurcation parameter symbolic.
  ModelSpec ode_model() const;

  CycleOptions cycle_options() const;

  /// f and g of the slow-fast form for the classical expansion: f = F and
  /// g = G / eps (G must carry the eps factor explicitly).
  Expr slow_fast_f() const;
  Expr slow_fast_g() const;

  /// Fold abscissa: the unique exact rational root of d(seed)/dx inside the
  /// fold bracket.
  Rational fold_abscissa() const;
};

}  // namespace canard
