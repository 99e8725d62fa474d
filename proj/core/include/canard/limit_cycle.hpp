#pragma once

#include <optional>

#include "canard/ode.hpp"

namespace canard {

/// Parsed planar system ready for simulation: state (var0, var1) with
/// right-hand sides rhs0, rhs1, named constants already substituted and the
/// bifurcation parameter still symbolic.
struct ModelSpec {
  std::string var0, var1;
  Expr rhs0, rhs1;
  std::string param;
  double param_value = 0;
};

PlanarField compile_field(const ModelSpec& model, double param_value);

struct CycleOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double transient = 500;
  double window = 200;   // span used to calibrate the section level
  double t_max = 0;      // 0: transient * 10 + 2000
  int max_returns = 400;
  double match_rtol = 1e-6;  // consecutive-return agreement
  int section_var = 0;       // coordinate whose mid-level crossing is the section
};

/// Measured limit cycle: amplitude per state variable (max - min over the
/// final loop), period between section returns, and how the measurement
/// ended. A trajectory that lands on a fixed point reports it instead of
/// cycling forever.
struct CycleStats {
  enum class Status { converged, fixed_point, not_converged };
  Status status = Status::not_converged;
  State2 amplitude{0, 0};
  double period = 0;
  int returns_used = 0;
  State2 fixed_point{0, 0};
  State2 loop_start{0, 0};  // state at the last section return
  double section_value = 0;
  int section_var = 0;
};

CycleStats find_limit_cycle(const ModelSpec& model, double param_value, State2 seed,
                            const CycleOptions& opts);

struct ExplosionResult {
  double parameter = 0;  // midpoint of the final bracket
  double lo = 0, hi = 0;
  double threshold = 0;
  CycleStats stat_lo, stat_hi;
  int evaluations = 0;
};

/// Bisection on the classifier amplitude(p) > threshold. The default
/// threshold is the geometric mean of the endpoint amplitudes (a fixed-point
/// outcome counts as amplitude 0). SameClassAtEndpoints when the endpoints do
/// not straddle the threshold.
ExplosionResult explosion_bisect(const ModelSpec& model, double lo, double hi, double param_tol,
                                 State2 seed, const CycleOptions& opts,
                                 std::optional<double> threshold = {});

struct SweepPoint {
  double parameter;
  CycleStats stats;
};
std::vector<SweepPoint> amplitude_sweep(const ModelSpec& model, double lo, double hi, int points,
                                        State2 seed, const CycleOptions& opts);

}  // namespace canard
