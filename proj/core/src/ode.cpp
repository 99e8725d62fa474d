#include "canard/ode.hpp"

#include <cmath>

namespace canard {

void PlanarField::compile(const Expr& e, const std::string& var0, const std::string& var1,
                          std::vector<Instr>& out) {
  switch (e.kind()) {
    case ExprKind::constant:
      out.push_back({Op::push_const, 0, 0, e.value().to_double()});
      return;
    case ExprKind::variable:
      if (e.name() == var0) {
        out.push_back({Op::push_var0});
      } else if (e.name() == var1) {
        out.push_back({Op::push_var1});
      } else {
        fail(errc::unknown_identifier,
             "unbound variable '" + e.name() + "' in a compiled vector field");
      }
      return;
    case ExprKind::sum:
    case ExprKind::product: {
      for (const Expr& k : e.children()) compile(k, var0, var1, out);
      out.push_back({e.kind() == ExprKind::sum ? Op::add : Op::mul,
                     static_cast<int>(e.children().size())});
      return;
    }
    case ExprKind::power:
      compile(e.children()[0], var0, var1, out);
      out.push_back({Op::pow, 0, e.exponent()});
      return;
    case ExprKind::sqrt_:
      compile(e.children()[0], var0, var1, out);
      out.push_back({Op::sqrt_});
      return;
  }
  fail(errc::internal, "unhandled expression kind");
}

PlanarField::PlanarField(const Expr& rhs0, const Expr& rhs1, const std::string& var0,
                         const std::string& var1) {
  compile(rhs0, var0, var1, tape_[0]);
  compile(rhs1, var0, var1, tape_[1]);
  stack_.reserve(64);
}

double PlanarField::run(const std::vector<Instr>& tape, double v0, double v1) const {
  stack_.clear();
  for (const Instr& in : tape) {
    switch (in.op) {
      case Op::push_const:
        stack_.push_back(in.value);
        break;
      case Op::push_var0:
        stack_.push_back(v0);
        break;
      case Op::push_var1:
        stack_.push_back(v1);
        break;
      case Op::add: {
        double acc = 0;
        for (int i = 0; i < in.count; ++i) {
          acc += stack_.back();
          stack_.pop_back();
        }
        stack_.push_back(acc);
        break;
      }
      case Op::mul: {
        double acc = 1;
        for (int i = 0; i < in.count; ++i) {
          acc *= stack_.back();
          stack_.pop_back();
        }
        stack_.push_back(acc);
        break;
      }
      case Op::pow:
        stack_.back() = std::pow(stack_.back(), static_cast<double>(in.exponent));
        break;
      case Op::sqrt_:
        stack_.back() = std::sqrt(stack_.back());
        break;
    }
  }
  return stack_.back();
}

void PlanarField::operator()(const State2& y, State2& dydt) const {
  dydt[0] = run(tape_[0], y[0], y[1]);
  dydt[1] = run(tape_[1], y[0], y[1]);
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output coefficients
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

bool finite2(const State2& y) { return std::isfinite(y[0]) && std::isfinite(y[1]); }

}  // namespace

void integrate_adaptive(const PlanarField& f, State2& y, double t0, double t1,
                        const IntegrateOptions& opts,
                        const std::function<bool(const DenseSegment&)>& observer) {
  if (!(t1 > t0)) return;
  double t = t0;
  double h = std::min(opts.h0, t1 - t0);
  State2 k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
  f(y, k1);
  if (!finite2(k1)) fail(errc::non_finite_state, "vector field not finite at the initial state");

  for (std::size_t step = 0; step < opts.max_steps; ++step) {
    if (t >= t1) return;
    if (h > t1 - t) h = t1 - t;
    double floor = opts.h_floor_rel * (1.0 + std::fabs(t));
    if (h < floor)
      fail(errc::step_floor_reached,
           "step collapsed below the floor at t = " + std::to_string(t));

    for (int i = 0; i < 2; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    f(ytmp, k2);
    for (int i = 0; i < 2; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(ytmp, k3);
    for (int i = 0; i < 2; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(ytmp, k4);
    for (int i = 0; i < 2; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(ytmp, k5);
    for (int i = 0; i < 2; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(ytmp, k6);
    for (int i = 0; i < 2; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(ynew, k7);

    if (!finite2(ynew) || !finite2(k7)) {
      h *= 0.1;
      if (h < floor) fail(errc::non_finite_state, "state left the floating-point range");
      continue;
    }

    double errnorm = 0;
    for (int i = 0; i < 2; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = opts.atol + opts.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      double q = err[i] / sc;
      errnorm += q * q;
    }
    errnorm = std::sqrt(errnorm / 2);

    if (errnorm <= 1.0) {
      if (observer) {
        DenseSegment seg;
        seg.t0 = t;
        seg.t1 = t + h;
        for (int i = 0; i < 2; ++i) {
          double dy = ynew[i] - y[i];
          seg.r1[i] = y[i];
          seg.r2[i] = dy;
          seg.r3[i] = h * k1[i] - dy;
          seg.r4[i] = dy - h * k7[i] - seg.r3[i];
          seg.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                           d7 * k7[i]);
        }
        if (!observer(seg)) {
          y = ynew;
          return;
        }
      }
      t += h;
      y = ynew;
      k1 = k7;  // FSAL
      double fac = errnorm > 0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
      h *= std::min(5.0, std::max(0.2, fac));
    } else {
      double fac = 0.9 * std::pow(errnorm, -0.2);
      h *= std::max(0.1, fac);
    }
  }
  fail(errc::step_floor_reached, "maximum step count exceeded");
}

Trajectory integrate_path(const PlanarField& f, State2 y0, double t0, double t1,
                          double sample_dt, const IntegrateOptions& opts) {
  Trajectory out;
  out.t.push_back(t0);
  out.y.push_back(y0);
  double next = sample_dt > 0 ? t0 + sample_dt : t0;
  State2 y = y0;
  integrate_adaptive(f, y, t0, t1, opts, [&](const DenseSegment& seg) {
    if (sample_dt > 0) {
      while (next <= seg.t1) {
        out.t.push_back(next);
        out.y.push_back(seg.eval(next));
        next += sample_dt;
      }
    } else {
      out.t.push_back(seg.t1);
      out.y.push_back(seg.eval(seg.t1));
    }
    return true;
  });
  if (out.t.back() != t1) {
    out.t.push_back(t1);
    out.y.push_back(y);
  }
  return out;
}

}  // namespace canard
