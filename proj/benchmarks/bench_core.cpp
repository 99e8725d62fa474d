#include <benchmark/benchmark.h>

#include "canard/iteration.hpp"
#include "canard/ode.hpp"
#include "canard/parse.hpp"
#include "canard/real_roots.hpp"

using namespace canard;

namespace {

IterationMap vdp_map() {
  Expr F = parse_expression("y - (x^3/3 - x)", {"x", "y"});
  Expr G = parse_expression("(1/10)*(c - x)", {"x", "c"});
  return solve_for_dependent(F, G, SystemNames{"x", "y", "c"}, SolveBranch::linear,
                             Rational(1, 2), Rational(3, 2));
}

void BM_ParseCanonicalize(benchmark::State& state) {
  const std::string text = "x^3/3 - x + (x + 1)^2*(c - x)/(10*x^4 + 20*x^3 - 20*x - 9)";
  const std::vector<std::string> vars{"x", "c"};
  for (auto _ : state) {
    Expr e = parse_expression(text, vars);
    benchmark::DoNotOptimize(&e);
  }
}
BENCHMARK(BM_ParseCanonicalize);

void BM_DifferentiateSqrtSeed(benchmark::State& state) {
  Expr seed = parse_expression("sqrt(T/((1/100 + T)*(1/50 + T)))", {"T"});
  for (auto _ : state) {
    Expr d = differentiate(seed, "T");
    benchmark::DoNotOptimize(&d);
  }
}
BENCHMARK(BM_DifferentiateSqrtSeed);

void BM_RealRootsQuartic(benchmark::State& state) {
  PolyQ p2 = PolyQ::from_coeffs(
      {Rational(-9, 10), Rational(-2), Rational(0), Rational(2), Rational(1)});
  for (auto _ : state) {
    auto roots = real_roots(p2, Rational(-2), Rational(2));
    benchmark::DoNotOptimize(&roots);
  }
}
BENCHMARK(BM_RealRootsQuartic);

void BM_VdpIterationK3(benchmark::State& state) {
  IterationMap map = vdp_map();
  StepOptions opts;
  for (auto _ : state) {
    RunResult run = run_iteration(map, 3, opts);
    benchmark::DoNotOptimize(&run);
  }
}
BENCHMARK(BM_VdpIterationK3);

void BM_IntegrateVdpPeriod(benchmark::State& state) {
  Expr Fx = parse_expression("y - (x^3/3 - x)", {"x", "y"});
  Expr Gy = parse_expression("(1/10)*(99/100 - x)", {"x", "y"});
  PlanarField f(Fx, Gy, "x", "y");
  IntegrateOptions io;
  for (auto _ : state) {
    State2 y{2.0, 0.0};
    integrate_adaptive(f, y, 0.0, 30.0, io);
    benchmark::DoNotOptimize(&y);
  }
}
BENCHMARK(BM_IntegrateVdpPeriod);

}  // namespace

BENCHMARK_MAIN();
