#include <cmath>
#include <random>

#include "canard/iteration.hpp"
#include "canard/parse.hpp"
#include "canard/real_roots.hpp"
#include "doctest.h"

using namespace canard;

namespace {

// van der Pol with eps = 1/10 pinned
IterationMap vdp_map() {
  Expr F = parse_expression("y - (x^3/3 - x)", {"x", "y"});
  Expr G = parse_expression("(1/10)*(c - x)", {"x", "c"});
  SystemNames names{"x", "y", "c"};
  return solve_for_dependent(F, G, names, SolveBranch::linear, Rational(1, 2), Rational(3, 2));
}

// templator with k_u=1/100, k_T=1, q=1, K=1/50 pinned
IterationMap templator_map() {
  std::vector<std::string> vars{"T", "X", "r", "k_u", "k_T", "q", "K"};
  Expr F = parse_expression("k_u*X^2 + k_T*X^2*T - q*T/(K + T)", vars);
  Expr G = parse_expression("r - k_u*X^2 - k_T*X^2*T", vars);
  std::map<std::string, Expr> consts{{"k_u", Expr::constant(Rational(1, 100))},
                                     {"k_T", Expr::constant(1)},
                                     {"q", Expr::constant(1)},
                                     {"K", Expr::constant(Rational(1, 50))}};
  F = substitute(F, consts);
  G = substitute(G, consts);
  SystemNames names{"T", "X", "r"};
  return solve_for_dependent(F, G, names, SolveBranch::quadratic_positive, Rational(1, 1000),
                             Rational(1));
}

}  // namespace

TEST_CASE("solve_for_dependent: van der Pol linear solve") {
  IterationMap map = vdp_map();
  Expr expected = parse_expression("x^3/3 - x + (1/10)*(c - x)/p", {"x", "c", "p"});
  CHECK(is_zero_expr(map.phi - expected));
  CHECK(map.seed == parse_expression("x^3/3 - x", {"x"}));

  // degree guard
  Expr F3 = parse_expression("y^3 - x", {"x", "y"});
  Expr G = parse_expression("c - x", {"x", "c"});
  CHECK_THROWS_AS(
      solve_for_dependent(F3, G, SystemNames{"x", "y", "c"}, SolveBranch::linear,
                          Rational(0), Rational(1)),
      error);

  // branch mismatch
  try {
    solve_for_dependent(parse_expression("y - x", {"x", "y"}), G,
                        SystemNames{"x", "y", "c"}, SolveBranch::quadratic_positive,
                        Rational(0), Rational(1));
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::branch_invalid);
  }
}

TEST_CASE("solve_for_dependent: trivial slope-free system") {
  Expr F = parse_expression("y - x", {"x", "y"});
  Expr G = Expr::constant(0);
  IterationMap map = solve_for_dependent(F, G, SystemNames{"x", "y", "c"}, SolveBranch::linear,
                                         Rational(0), Rational(1));
  CHECK(is_zero_expr(map.phi - Expr::variable("x")));
}

TEST_CASE("solve_for_dependent: templator quadratic-positive matches the explicit map") {
  IterationMap map = templator_map();
  // reference form with the same constants substituted
  Expr reference = parse_expression(
      "sqrt((r*(1/50 + T) + 1*T*p) / ((p + 1)*(1/100 + 1*T)*(1/50 + T)))",
      {"T", "p", "r"});
  for (double t : {0.05, 0.3, 0.7}) {
    for (double p : {0.5, 2.0}) {
      for (double r : {0.4, 0.9}) {
        std::map<std::string, double> pt{{"T", t}, {map.names.slope, p}, {"r", r}};
        std::map<std::string, double> pt_ref{{"T", t}, {"p", p}, {"r", r}};
        CHECK(eval_numeric(map.phi, pt) ==
              doctest::Approx(eval_numeric(reference, pt_ref)).epsilon(1e-12));
      }
    }
  }

  // isocline seed equals the dT/dt = 0 isocline
  Expr seed_ref = parse_expression("sqrt(1*T/((1/100 + 1*T)*(1/50 + T)))", {"T"});
  for (double t : {0.05, 0.3, 0.7})
    CHECK(eval_numeric(map.seed, {{"T", t}}) ==
          doctest::Approx(eval_numeric(seed_ref, {{"T", t}})).epsilon(1e-12));
}

TEST_CASE("isocline_seed edge cases") {
  CHECK(isocline_seed(parse_expression("y", {"y"}), SystemNames{"x", "y", "c"},
                      SolveBranch::linear) == Expr::constant(0));
  try {
    isocline_seed(parse_expression("y - c*x", {"x", "y", "c"}), SystemNames{"x", "y", "c"},
                  SolveBranch::linear);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::seed_depends_on_parameter);
  }
}

TEST_CASE("van der Pol step 1: exact cancellation at x = 1") {
  IterationMap map = vdp_map();
  StepOptions opts;
  CanardIterate y0 = seed_iterate(map, IterationMode::exact);
  auto cands = step(map, y0, opts);
  REQUIRE(cands.size() == 1);
  const CanardIterate& it = cands[0];
  CHECK(it.resolved);
  CHECK(it.root_is_exact);
  CHECK(it.root_exact == Rational(1));
  CHECK(it.c_is_exact);
  CHECK(it.c_exact == Rational(1));

  // y1 = x^3/3 - x - (1/10)/(x+1)
  RatFuncQ y1_expected =
      to_ratfunc(parse_expression("x^3/3 - x - (1/10)/(x + 1)", {"x"}), "x");
  CHECK(*it.rep_exact == y1_expected);

  // fixed-point identity: y1 == Phi(x, y0', c1) exactly
  RatFuncQ lhs = *it.rep_exact;
  std::map<std::string, RatFuncQ> bind{
      {"x", RatFuncQ::x()},
      {map.names.slope, to_ratfunc(map.seed, "x").derivative()},
      {"c", RatFuncQ::from_rational(it.c_exact)}};
  CHECK(lhs == eval_ratfunc(map.phi, bind));
}

TEST_CASE("van der Pol run to k = 3 reproduces the printed iteration") {
  IterationMap map = vdp_map();
  StepOptions opts;
  RunResult run = run_iteration(map, 3, opts);
  REQUIRE(run.steps.size() == 3);
  REQUIRE(run.steps[0].size() == 1);
  REQUIRE(run.steps[1].size() == 1);
  REQUIRE(run.steps[2].size() >= 1);

  const CanardIterate& it1 = run.steps[0][0];
  const CanardIterate& it2 = run.steps[1][0];
  // step 3 may report several in-bracket roots; the canard candidate is the
  // one near 0.9865
  const CanardIterate* it3 = nullptr;
  for (const CanardIterate& c : run.steps[2])
    if (c.resolved && std::fabs(c.root - 0.9865) < 0.01) it3 = &c;
  REQUIRE(it3 != nullptr);

  CHECK(it1.c_is_exact);
  CHECK(it1.c_exact == Rational(1));
  CHECK(it2.c_value == doctest::Approx(0.987258).epsilon(1e-6));
  CHECK(it2.root == doctest::Approx(0.987258).epsilon(1e-6));
  CHECK(it3->c_value == doctest::Approx(0.986481).epsilon(1e-6));
  CHECK(it3->root == doctest::Approx(0.986481).epsilon(1e-6));

  // relative deviations from the asymptotic value 0.986394
  double cc = 0.986394;
  CHECK(std::fabs((it1.c_value - cc) / cc) == doctest::Approx(0.0138).epsilon(0.01));
  CHECK(std::fabs((it2.c_value - cc) / cc) == doctest::Approx(0.0009).epsilon(0.05));
  CHECK(std::fabs((it3->c_value - cc) / cc) == doctest::Approx(0.00009).epsilon(0.05));

  // monotone convergence toward the asymptotic value
  CHECK(std::fabs(it2.c_value - cc) < std::fabs(it1.c_value - cc));
  CHECK(std::fabs(it3->c_value - cc) < std::fabs(it2.c_value - cc));

  // iterate-2 denominator: monic rescaling of p2, roots -0.603433, 0.987258
  REQUIRE(it2.den_exact.has_value());
  PolyQ expected_d2 = PolyQ::from_coeffs(
      {Rational(-9, 10), Rational(-2), Rational(0), Rational(2), Rational(1)});
  CHECK(*it2.den_exact == expected_d2);

  // deflated cofactor of p2 matches q2 after rescaling by 10
  REQUIRE(it2.rep_numeric.has_value());
  const PolyD& q2 = it2.rep_numeric->den();
  REQUIRE(q2.degree() == 3);
  std::vector<double> q2_expected{9.11616, 29.4919, 29.8726, 10.0};
  for (int i = 0; i <= 3; ++i)
    CHECK(10.0 * q2.coeff(i) == doctest::Approx(q2_expected[i]).epsilon(1e-4));

  // iterate-3 denominator: degree 8, real roots as printed
  REQUIRE(it3->den_numeric.has_value());
  const PolyD& d3 = *it3->den_numeric;
  CHECK(d3.degree() == 8);
  auto d3_roots = scan_roots(d3, -2.0, 2.0);
  REQUIRE(d3_roots.size() == 4);
  CHECK(d3_roots[0] == doctest::Approx(-1.24503).epsilon(1e-4));
  CHECK(d3_roots[1] == doctest::Approx(-0.999999).epsilon(1e-4));
  CHECK(d3_roots[2] == doctest::Approx(-0.389117).epsilon(1e-4));
  CHECK(d3_roots[3] == doctest::Approx(0.986481).epsilon(1e-4));

  // numerator of y3 is degree 11 in x (before deflation: deg(den) + 3)
  // after deflation by one root the stored numerator has degree 10
  CHECK(it3->rep_numeric->num().degree() == 10);
}

TEST_CASE("van der Pol numeric-mode fixed point and certificates") {
  IterationMap map = vdp_map();
  StepOptions opts;
  RunResult run = run_iteration(map, 3, opts);
  const CanardIterate& it1 = run.steps[0][0];
  const CanardIterate& it2 = run.steps[1][0];

  // pointwise fixed-point identity for the numeric iterate 2:
  // y2(x) == Phi(x, y1'(x), c2) away from the removable point
  const RatFuncQ& y1 = *it1.rep_exact;
  RatFuncD y1d = to_double(y1);
  const RatFuncD& y2 = *it2.rep_numeric;
  int checked = 0;
  for (int i = 0; i <= 50; ++i) {
    double x = -1.8 + 3.6 * i / 50;
    double den1 = y1d.den()(x);
    double den2 = y2.den()(x);
    if (std::fabs(den1) < 1e-3 || std::fabs(den2) < 1e-3) continue;
    double slope = y1d.num().derivative()(x) / den1 -
                   y1d.num()(x) * y1d.den().derivative()(x) / (den1 * den1);
    double rhs;
    try {
      rhs = eval_numeric(map.phi, {{"x", x}, {map.names.slope, slope}, {"c", it2.c_value}});
    } catch (const error&) {
      continue;
    }
    double lhs = y2.num()(x) / den2;
    if (std::fabs(rhs) < 1e6) {
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
      ++checked;
    }
  }
  CHECK(checked >= 40);

  // cancellation certificate: canceled iterate bounded at x* +- 1e-6 while a
  // parameter perturbation of 1e-3 blows up at x*
  double xs = it2.root;
  auto y_at = [&](double x, double c) {
    double slope = y1d.num().derivative()(x) / y1d.den()(x) -
                   y1d.num()(x) * y1d.den().derivative()(x) /
                       (y1d.den()(x) * y1d.den()(x));
    return eval_numeric(map.phi, {{"x", x}, {map.names.slope, slope}, {"c", c}});
  };
  double bound =
      std::max(std::fabs(y_at(xs + 1e-6, it2.c_value)), std::fabs(y_at(xs - 1e-6, it2.c_value)));
  CHECK(bound < 10.0);
  double blowup = std::max(std::fabs(y_at(xs, it2.c_value + 1e-3)),
                           std::fabs(y_at(xs, it2.c_value - 1e-3)));
  CHECK(blowup > 1e3 * bound);
  CHECK(it2.certificate_residual <= 1e-9);
}

TEST_CASE("templator: one step yields both canard points") {
  IterationMap map = templator_map();
  StepOptions opts;
  RunResult run = run_iteration(map, 1, opts);
  REQUIRE(run.steps.size() == 1);
  std::vector<const CanardIterate*> resolved;
  for (const CanardIterate& c : run.steps[0])
    if (c.resolved) resolved.push_back(&c);
  REQUIRE(resolved.size() == 2);

  CHECK(resolved[0]->root == doctest::Approx(0.0143454).epsilon(1e-4));
  CHECK(resolved[0]->c_value == doctest::Approx(0.417681).epsilon(1e-5));
  CHECK(resolved[1]->root == doctest::Approx(0.599393).epsilon(1e-5));
  CHECK(resolved[1]->c_value == doctest::Approx(0.967710).epsilon(1e-5));

  // the denominator is independent of the bifurcation parameter
  REQUIRE(resolved[0]->den_symbolic.has_value());
  CHECK(free_variables(*resolved[0]->den_symbolic).count("r") == 0);

  // certificate: numerator residual at (T*, r*) is tiny
  for (const CanardIterate* c : resolved) CHECK(c->certificate_residual <= 1e-9);
}

TEST_CASE("property: solve_for_dependent round-trips through the trajectory equation") {
  // substituting dep = Phi and the slope symbol back into F*p - G vanishes on
  // the branch, checked at 50 random points
  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> xs(0.2, 1.4), ps(0.3, 2.5), cs(0.1, 1.2);

  {
    IterationMap map = vdp_map();
    Expr F = parse_expression("y - (x^3/3 - x)", {"x", "y"});
    Expr G = parse_expression("(1/10)*(c - x)", {"x", "c"});
    for (int i = 0; i < 50; ++i) {
      double x = xs(rng), p = ps(rng), c = cs(rng);
      double phi = eval_numeric(map.phi, {{"x", x}, {map.names.slope, p}, {"c", c}});
      double lhs = eval_numeric(F, {{"x", x}, {"y", phi}}) * p -
                   eval_numeric(G, {{"x", x}, {"c", c}});
      CHECK(std::fabs(lhs) <= 1e-9 * (1 + std::fabs(phi) * p));
    }
  }
  {
    IterationMap map = templator_map();
    std::vector<std::string> vars{"T", "X", "r", "k_u", "k_T", "q", "K"};
    std::map<std::string, Expr> consts{{"k_u", Expr::constant(Rational(1, 100))},
                                       {"k_T", Expr::constant(1)},
                                       {"q", Expr::constant(1)},
                                       {"K", Expr::constant(Rational(1, 50))}};
    Expr F = substitute(parse_expression("k_u*X^2 + k_T*X^2*T - q*T/(K + T)", vars), consts);
    Expr G = substitute(parse_expression("r - k_u*X^2 - k_T*X^2*T", vars), consts);
    for (int i = 0; i < 50; ++i) {
      double t = xs(rng), p = ps(rng), r = cs(rng);
      double phi;
      try {
        phi = eval_numeric(map.phi, {{"T", t}, {map.names.slope, p}, {"r", r}});
      } catch (const error&) {
        continue;  // negative radicand for this draw
      }
      double lhs = eval_numeric(F, {{"T", t}, {"X", phi}}) * p -
                   eval_numeric(G, {{"T", t}, {"X", phi}, {"r", r}});
      CHECK(std::fabs(lhs) <= 1e-9 * (1 + std::fabs(r) + std::fabs(phi) * p));
    }
  }
}

TEST_CASE("expression budget stops the run with the last good iterate") {
  IterationMap map = vdp_map();
  StepOptions opts;
  opts.node_budget = 5;  // below even the first iterate's size
  RunResult run = run_iteration(map, 3, opts);
  CHECK(run.steps.size() == 1);
  CHECK(run.steps[0][0].resolved);
  CHECK(run.stop_reason.find("ExpressionBudgetExceeded") != std::string::npos);
}

TEST_CASE("no singularity in bracket leaves the parameter unresolved") {
  Expr F = parse_expression("y - x", {"x", "y"});
  Expr G = Expr::constant(0);
  IterationMap map = solve_for_dependent(F, G, SystemNames{"x", "y", "c"}, SolveBranch::linear,
                                         Rational(0), Rational(1));
  StepOptions opts;
  RunResult run = run_iteration(map, 1, opts);
  REQUIRE(run.steps.size() == 1);
  REQUIRE(run.steps[0].size() == 1);
  CHECK(!run.steps[0][0].resolved);
  bool mentioned = false;
  for (const std::string& d : run.steps[0][0].diagnostics)
    if (d.find("NoSingularityInBracket") != std::string::npos) mentioned = true;
  CHECK(mentioned);
}
