#include <cmath>

#include "canard/limit_cycle.hpp"
#include "canard/parse.hpp"
#include "doctest.h"

using namespace canard;

namespace {

ModelSpec templator_model() {
  std::vector<std::string> vars{"T", "X", "r", "k_u", "k_T", "q", "K"};
  std::map<std::string, Expr> consts{{"k_u", Expr::constant(Rational(1, 100))},
                                     {"k_T", Expr::constant(1)},
                                     {"q", Expr::constant(1)},
                                     {"K", Expr::constant(Rational(1, 50))}};
  Expr FT = substitute(parse_expression("k_u*X^2 + k_T*X^2*T - q*T/(K + T)", vars), consts);
  Expr GX = substitute(parse_expression("r - k_u*X^2 - k_T*X^2*T", vars), consts);
  return ModelSpec{"T", "X", FT, GX, "r", 0.42};
}

ModelSpec vdp_model() {
  Expr Fx = parse_expression("y - (x^3/3 - x)", {"x", "y"});
  Expr Gy = substitute(parse_expression("eps*(c - x)", {"x", "y", "c", "eps"}),
                       {{"eps", Expr::constant(Rational(1, 10))}});
  return ModelSpec{"x", "y", Fx, Gy, "c", 0.99};
}

CycleOptions templator_opts() {
  CycleOptions co;
  co.transient = 1500;
  co.window = 400;
  co.max_returns = 200;
  return co;
}

CycleOptions vdp_opts() {
  CycleOptions co;
  co.transient = 400;
  co.window = 100;
  co.max_returns = 300;
  return co;
}

}  // namespace

TEST_CASE("integrate: exponential decay against the exact solution") {
  PlanarField f(parse_expression("0 - x", {"x", "y"}), Expr::constant(0), "x", "y");
  IntegrateOptions io;
  State2 y{1.0, 0.0};
  integrate_adaptive(f, y, 0.0, 1.0, io);
  CHECK(std::fabs(y[0] - std::exp(-1.0)) <= 1e-8);
}

TEST_CASE("integrate: global error scales with rtol (order check)") {
  PlanarField f(parse_expression("0 - x", {"x", "y"}), Expr::constant(0), "x", "y");
  double errs[3];
  int i = 0;
  for (double rtol : {1e-4, 1e-5, 1e-6}) {
    IntegrateOptions io;
    io.rtol = rtol;
    io.atol = 1e-14;
    State2 y{1.0, 0.0};
    integrate_adaptive(f, y, 0.0, 5.0, io);
    errs[i++] = std::fabs(y[0] - std::exp(-5.0));
  }
  CHECK(errs[0] / errs[1] >= 5.0);
  CHECK(errs[0] / errs[1] <= 20.0);
  CHECK(errs[1] / errs[2] >= 5.0);
  CHECK(errs[1] / errs[2] <= 20.0);
}

TEST_CASE("integrate: harmonic oscillator energy drift over 100 periods") {
  PlanarField f(parse_expression("y", {"x", "y"}),
                parse_expression("0 - x", {"x", "y"}), "x", "y");
  IntegrateOptions io;
  io.rtol = 1e-10;
  io.atol = 1e-12;
  State2 y{1.0, 0.0};
  integrate_adaptive(f, y, 0.0, 200 * M_PI, io);
  double energy = 0.5 * (y[0] * y[0] + y[1] * y[1]);
  CHECK(std::fabs(energy - 0.5) < 1e-6);
}

TEST_CASE("integrate: dense output samples the trajectory") {
  PlanarField f(parse_expression("0 - x", {"x", "y"}), Expr::constant(0), "x", "y");
  IntegrateOptions io;
  Trajectory tr = integrate_path(f, {1.0, 0.0}, 0.0, 1.0, 0.01, io);
  REQUIRE(tr.t.size() >= 100);
  for (size_t i = 0; i < tr.t.size(); ++i)
    CHECK(tr.y[i][0] == doctest::Approx(std::exp(-tr.t[i])).epsilon(1e-7));
}

TEST_CASE("vdp settles onto a large relaxation cycle below the canard point") {
  CycleStats s = find_limit_cycle(vdp_model(), 0.9, {0.0, 0.0}, vdp_opts());
  CHECK(s.status == CycleStats::Status::converged);
  CHECK(s.amplitude[0] > 2.0);
}

TEST_CASE("vdp beyond the Hopf point spirals into the fixed point") {
  CycleStats s = find_limit_cycle(vdp_model(), 1.05, {0.0, 0.0}, vdp_opts());
  CHECK(s.status == CycleStats::Status::fixed_point);
  // the fixed point sits at x = c on the cubic nullcline
  CHECK(s.fixed_point[0] == doctest::Approx(1.05).epsilon(1e-6));
}

TEST_CASE("templator: small versus large cycles around the first explosion") {
  ModelSpec m = templator_model();
  CycleOptions co = templator_opts();
  CycleStats small = find_limit_cycle(m, 0.419940, {0.1, 2.0}, co);
  CycleStats large = find_limit_cycle(m, 0.419945, {0.1, 2.0}, co);
  CHECK(small.status == CycleStats::Status::converged);
  CHECK(large.status == CycleStats::Status::converged);
  CHECK(large.amplitude[0] / small.amplitude[0] > 5.0);  // amplitude ratio in T

  CycleStats big2 = find_limit_cycle(m, 0.96755, {0.1, 2.0}, co);
  CycleStats small2 = find_limit_cycle(m, 0.96756, {0.1, 2.0}, co);
  CHECK(big2.amplitude[0] / small2.amplitude[0] > 5.0);
}

TEST_CASE("cycle amplitude is seed-independent in the basin") {
  ModelSpec m = templator_model();
  CycleOptions co = templator_opts();
  double base = -1;
  for (State2 seed : {State2{0.1, 2.0}, State2{0.3, 1.0}, State2{0.05, 3.0},
                      State2{0.5, 0.5}, State2{0.2, 4.0}}) {
    CycleStats s = find_limit_cycle(m, 0.43, seed, co);
    REQUIRE(s.status == CycleStats::Status::converged);
    if (base < 0)
      base = s.amplitude[0];
    else
      CHECK(s.amplitude[0] == doctest::Approx(base).epsilon(1e-4));
  }
}

TEST_CASE("templator explosion near r = 0.419942") {
  ModelSpec m = templator_model();
  ExplosionResult e = explosion_bisect(m, 0.4199, 0.4200, 1e-6, {0.1, 2.0}, templator_opts());
  CHECK(std::fabs(e.parameter - 0.419942) <= 5e-5);

  // hysteresis-free: perturbing the interval endpoints by 10% of its width
  // moves the answer by less than twice the tolerance
  ExplosionResult e2 =
      explosion_bisect(m, 0.41989, 0.42001, 1e-6, {0.1, 2.0}, templator_opts());
  CHECK(std::fabs(e2.parameter - e.parameter) < 2e-6);

  // explosion sharpness: amplitude jumps by more than 5x across 1e-5
  CycleStats below = find_limit_cycle(m, e.parameter - 5e-6, {0.1, 2.0}, templator_opts());
  CycleStats above = find_limit_cycle(m, e.parameter + 5e-6, {0.1, 2.0}, templator_opts());
  double lo_amp = std::min(below.amplitude[0], above.amplitude[0]);
  double hi_amp = std::max(below.amplitude[0], above.amplitude[0]);
  CHECK(hi_amp / lo_amp > 5.0);
}

TEST_CASE("same classification at both endpoints is an error") {
  ModelSpec m = vdp_model();
  try {
    explosion_bisect(m, 0.9, 0.9001, 1e-5, {0.0, 0.0}, vdp_opts());
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::same_class_at_endpoints);
  }
}

TEST_CASE("amplitude sweep produces a monotone-bracketed table") {
  ModelSpec m = templator_model();
  auto rows = amplitude_sweep(m, 0.4199, 0.4200, 5, {0.1, 2.0}, templator_opts());
  REQUIRE(rows.size() == 5);
  CHECK(rows.front().stats.amplitude[0] < 0.1);
  CHECK(rows.back().stats.amplitude[0] > 1.0);
}
