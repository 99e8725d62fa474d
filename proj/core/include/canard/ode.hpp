#pragma once

#include <array>
#include <functional>
#include <vector>

#include "canard/expr.hpp"

namespace canard {

using State2 = std::array<double, 2>;

/// A planar vector field compiled from two expressions into postfix tapes,
/// so the integrator does not pay symbolic-tree traversal per evaluation.
/// Every free variable must be one of the two state names; parameters are
/// substituted before compilation. An instance carries a scratch stack:
/// concurrent integrations each need their own field.
class PlanarField {
 public:
  PlanarField(const Expr& rhs0, const Expr& rhs1, const std::string& var0,
              const std::string& var1);

  void operator()(const State2& y, State2& dydt) const;

 private:
  enum class Op : uint8_t { push_const, push_var0, push_var1, add, mul, pow, sqrt_ };
  struct Instr {
    Op op;
    int count = 0;     // operand count for add/mul
    long exponent = 0; // pow
    double value = 0;  // push_const
  };
  std::vector<Instr> tape_[2];
  mutable std::vector<double> stack_;

  static void compile(const Expr& e, const std::string& var0, const std::string& var1,
                      std::vector<Instr>& out);
  double run(const std::vector<Instr>& tape, double v0, double v1) const;
};

struct IntegrateOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h0 = 1e-6;
  double h_floor_rel = 1e-14;  // step floor relative to 1 + |t|
  std::size_t max_steps = 200000000;
};

/// Dense output over one accepted step (the standard quartic interpolant of
/// the Dormand-Prince pair).
struct DenseSegment {
  double t0 = 0, t1 = 0;
  State2 r1{}, r2{}, r3{}, r4{}, r5{};
  State2 eval(double t) const {
    double h = t1 - t0;
    double th = h != 0.0 ? (t - t0) / h : 0.0;
    double th1 = 1.0 - th;
    State2 out;
    for (int i = 0; i < 2; ++i)
      out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
    return out;
  }
};

/// Adaptive Dormand-Prince 5(4). The observer runs after every accepted step
/// and may stop the integration by returning false. Throws StepFloorReached
/// when error control collapses the step and NonFiniteState when the state
/// leaves the floating-point range.
void integrate_adaptive(const PlanarField& f, State2& y, double t0, double t1,
                        const IntegrateOptions& opts,
                        const std::function<bool(const DenseSegment&)>& observer = {});

struct Trajectory {
  std::vector<double> t;
  std::vector<State2> y;
};

/// Integrates and samples the dense output every sample_dt (endpoint always
/// included). sample_dt <= 0 records accepted steps only.
Trajectory integrate_path(const PlanarField& f, State2 y0, double t0, double t1,
                          double sample_dt, const IntegrateOptions& opts);

}  // namespace canard
