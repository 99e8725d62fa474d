#include <cmath>
#include <random>

#include "canard/expr.hpp"
#include "canard/parse.hpp"
#include "canard/expr_bridge.hpp"
#include "canard/real_roots.hpp"
#include "canard/ring_eval.hpp"
#include "doctest.h"

using namespace canard;

namespace {

const std::vector<std::string> xc = {"x", "c"};
const std::vector<std::string> xonly = {"x"};

Expr X() { return Expr::variable("x"); }

// Deterministic random expression generator.
struct ExprGen {
  std::mt19937 rng;
  bool allow_sqrt;

  explicit ExprGen(unsigned seed, bool sqrt_ok) : rng(seed), allow_sqrt(sqrt_ok) {}

  Rational small_rational() {
    std::uniform_int_distribution<int> num(-6, 6), den(1, 5);
    return Rational(num(rng), den(rng));
  }

  Expr gen(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : (allow_sqrt ? 5 : 4));
    switch (pick(rng)) {
      case 0:
        return Expr::constant(small_rational());
      case 1:
        return X();
      case 2: {
        std::vector<Expr> kids{gen(depth - 1), gen(depth - 1)};
        return Expr::add(std::move(kids));
      }
      case 3: {
        std::vector<Expr> kids{gen(depth - 1), gen(depth - 1)};
        return Expr::mul(std::move(kids));
      }
      case 4: {
        std::uniform_int_distribution<int> e(-3, 3);
        int k = e(rng);
        if (k == 0) k = 2;
        for (int attempt = 0; attempt < 8; ++attempt) {
          try {
            return Expr::pow(gen(depth - 1), k);
          } catch (const error&) {
            // 0^negative inside constant folding; retry
          }
        }
        return X();
      }
      default:
        for (int attempt = 0; attempt < 8; ++attempt) {
          try {
            return Expr::sqrt(gen(depth - 1));
          } catch (const error&) {
            // sqrt of a negative constant; retry
          }
        }
        return Expr::sqrt(X());
    }
  }
};

}  // namespace


TEST_CASE("rational basics") {
  CHECK(Rational::from_string("0.01") == Rational(1, 100));
  CHECK(Rational::from_string("0.419940") == Rational(41994, 100000));
  CHECK(Rational::from_string("-4/6") == Rational(-2, 3));
  CHECK(Rational(27, 16).to_string() == "27/16");
  CHECK(Rational(3, -4) == Rational(-3, 4));
  CHECK(Rational(2, 3).pow(-2) == Rational(9, 4));
  CHECK(simplest_in_interval(Rational(168, 100), Rational(17, 10)) == Rational(17, 10));
  CHECK(simplest_in_interval(Rational(1687, 1000), Rational(1688, 1000)) == Rational(27, 16));
  CHECK(simplest_in_interval(Rational(-1, 3), Rational(1, 7)) == Rational(0));
  CHECK(Rational::from_double(0.5) == Rational(1, 2));
}

TEST_CASE("parse canonical forms") {
  Expr e = parse_expression("x^3/3 - x", xonly);
  Expr manual = Expr::add({Expr::mul({Expr::constant(Rational(1, 3)), Expr::pow(X(), 3)}),
                           Expr::mul({Expr::constant(-1), X()})});
  CHECK(e == manual);

  CHECK(parse_expression("0", xonly) == Expr::constant(0));
  CHECK(parse_expression("2*3 + 1/2", xonly) == Expr::constant(Rational(13, 2)));

  Expr s = parse_expression("sqrt(q*T/((k_u+k_T*T)*(K+T)))",
                            {"q", "T", "k_u", "k_T", "K"});
  CHECK(s.kind() == ExprKind::sqrt_);

  CHECK(parse_expression("sqrt(4)", xonly) == Expr::constant(2));
  CHECK(parse_expression("sqrt(9/4)", xonly) == Expr::constant(Rational(3, 2)));
  // no radical denesting beyond constants
  CHECK(parse_expression("sqrt(2)", xonly).kind() == ExprKind::sqrt_);

  CHECK_THROWS_WITH_AS(parse_expression("x + ", xonly), doctest::Contains("position"),
                       error);
  CHECK_THROWS_AS(parse_expression("x * y", xonly), error);
  CHECK_THROWS_AS(parse_expression("x ^ x", xonly), error);
  CHECK_THROWS_AS(parse_expression("(x + 1", xonly), error);
  try {
    parse_expression("x + qq*2", xonly);
    CHECK(false);
  } catch (const error& err) {
    CHECK(err.code() == errc::unknown_identifier);
  }
}

TEST_CASE("canonicalization merges like terms and factors") {
  CHECK(parse_expression("x + x", xonly) == parse_expression("2*x", xonly));
  CHECK(parse_expression("x - x", xonly) == Expr::constant(0));
  CHECK(parse_expression("x*x*x", xonly) == Expr::pow(X(), 3));
  CHECK(parse_expression("x/x", xonly) == Expr::constant(1));
  CHECK(parse_expression("sqrt(x)*sqrt(x)", xonly) == X());
  CHECK(parse_expression("sqrt(x)^4", xonly) == Expr::pow(X(), 2));
  CHECK(parse_expression("(x^2)^3", xonly) == Expr::pow(X(), 6));
  CHECK(parse_expression("2*x + 3*x - 5*x", xonly) == Expr::constant(0));
}

TEST_CASE("differentiate examples") {
  Expr s = parse_expression("x^3/3 - x", xonly);
  CHECK(differentiate(s, "x") == parse_expression("x^2 - 1", xonly));
  CHECK(differentiate(Expr::variable("c"), "x") == Expr::constant(0));

  // derivative of sqrt against a central finite difference (step 1e-6)
  Expr radicand = parse_expression("q*T/((k_u + k_T*T)*(K + T))", {"q", "T", "k_u", "k_T", "K"});
  std::map<std::string, Expr> consts{{"q", Expr::constant(1)},
                                     {"k_u", Expr::constant(Rational(1, 100))},
                                     {"k_T", Expr::constant(1)},
                                     {"K", Expr::constant(Rational(1, 50))}};
  Expr R = substitute(radicand, consts);
  Expr f = Expr::sqrt(R);
  Expr df = differentiate(f, "T");
  double t0 = 0.5, h = 1e-6;
  double fd = (eval_numeric(f, {{"T", t0 + h}}) - eval_numeric(f, {{"T", t0 - h}})) / (2 * h);
  double got = eval_numeric(df, {{"T", t0}});
  CHECK(std::fabs(got - fd) <= 1e-8 * std::fabs(fd));
}

TEST_CASE("substitute examples") {
  Expr y1 = parse_expression("x^3/3 - x + (1/10)*(c - x)/(x^2 - 1)", xc);
  Expr pinned = substitute(y1, {{"c", Expr::constant(1)}});
  Expr expected = parse_expression("x^3/3 - x - (1/10)/(x + 1)", xonly);
  CHECK(to_ratfunc(pinned, "x") == to_ratfunc(expected, "x"));

  Expr e = parse_expression("sqrt(x) + c^2", xc);
  CHECK(substitute(e, {}) == e);  // canonicalization idempotence via rebuild

  Expr phi = parse_expression("x^3/3 - x + eps*(c - x)/p", {"x", "c", "eps", "p"});
  Expr eq18 = substitute(phi, {{"p", parse_expression("x^2 - 1", xonly)},
                               {"eps", Expr::constant(Rational(1, 10))}});
  CHECK(eq18 == parse_expression("x^3/3 - x + (1/10)*(c - x)/(x^2 - 1)", xc));
}

TEST_CASE("eval_numeric examples") {
  Expr s = parse_expression("x^3/3 - x", xonly);
  CHECK(eval_numeric(s, {{"x", 1.0}}) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));

  // isocline value against a direct arithmetic oracle
  Expr x0 = parse_expression("sqrt(q*T/((k_u + k_T*T)*(K + T)))", {"q", "T", "k_u", "k_T", "K"});
  std::map<std::string, double> pt{
      {"q", 1.0}, {"T", 0.599393}, {"k_u", 0.01}, {"k_T", 1.0}, {"K", 0.02}};
  double oracle = std::sqrt(1.0 * 0.599393 / ((0.01 + 1.0 * 0.599393) * (0.02 + 0.599393)));
  CHECK(std::fabs(eval_numeric(x0, pt) - oracle) <= 1e-12 * oracle);

  Expr pole = parse_expression("1/(x - 1)", xonly);
  try {
    eval_numeric(pole, {{"x", 1.0}});
    CHECK(false);
  } catch (const error& err) {
    CHECK(err.code() == errc::pole_at_point);
  }
  try {
    eval_numeric(parse_expression("sqrt(x)", xonly), {{"x", -2.0}});
    CHECK(false);
  } catch (const error& err) {
    CHECK(err.code() == errc::negative_radicand);
  }
}

TEST_CASE("eval_exact examples") {
  Expr p2 = parse_expression("x^4 + 2*x^3 - 2*x - 1 + eps", {"x", "eps"});
  CHECK(eval_exact(p2, {{"x", Rational(1, 2)}, {"eps", Rational(27, 16)}}) == Rational(0));
  CHECK(eval_exact(Expr::constant(Rational(5, 3)), {{"x", Rational(7)}}) == Rational(5, 3));
  // order-eps numerator of the third-iterate expansion: (c0 - x) at x=1, c0=1
  Expr n1 = parse_expression("c0 - x", {"x", "c0"});
  CHECK(eval_exact(n1, {{"x", Rational(1)}, {"c0", Rational(1)}}) == Rational(0));

  try {
    eval_exact(parse_expression("1/(x - 1)", xonly), {{"x", Rational(1)}});
    CHECK(false);
  } catch (const error& err) {
    CHECK(err.code() == errc::pole_at_point);
  }
  try {
    eval_exact(parse_expression("sqrt(x)", xonly), {{"x", Rational(4)}});
    CHECK(false);
  } catch (const error& err) {
    CHECK(err.code() == errc::sqrt_present);
  }
}

TEST_CASE("to_ratfunc examples") {
  // second-iterate body: denominator normalizes to the monic rescaling of p2
  Expr y2 = parse_expression("x^3/3 - x + (x + 1)^2*(c - x)/(10*x^4 + 20*x^3 - 20*x - 9)", xc);
  Expr pinned = substitute(y2, {{"c", Expr::constant(Rational(987258, 1000000))}});
  RatFuncQ f = to_ratfunc(pinned, "x");
  PolyQ expected_den = PolyQ::from_coeffs(
      {Rational(-9, 10), Rational(-2), Rational(0), Rational(2), Rational(1)});
  CHECK(f.den() == expected_den);

  RatFuncQ z = to_ratfunc(Expr::constant(0), "x");
  CHECK(z.is_zero());
  CHECK(z.den() == PolyQ(Rational(1)));

  try {
    to_ratfunc(parse_expression("sqrt(x)", xonly), "x");
    CHECK(false);
  } catch (const error& err) {
    CHECK(err.code() == errc::not_rational);
  }
  try {
    to_ratfunc(parse_expression("x + c", xc), "x");
    CHECK(false);
  } catch (const error& err) {
    CHECK(err.code() == errc::not_rational);
  }
}

TEST_CASE("quotient_normal_form examples") {
  Expr e = parse_expression("1/(x + 1) + x", xonly);
  QuotientForm q = quotient_normal_form(e);
  RatFuncQ lhs = to_ratfunc(q.numerator, "x") / to_ratfunc(q.denominator, "x");
  CHECK(lhs == to_ratfunc(e, "x"));
  CHECK(to_ratfunc(q.denominator, "x").num() == PolyQ::from_coeffs({Rational(1), Rational(1)}));

  // sqrt(a/b) surfaces its denominator
  Expr s = parse_expression("sqrt(x/(x + 1))", xonly);
  QuotientForm qs = quotient_normal_form(s);
  CHECK(free_variables(qs.denominator).count("x") == 1);
  double at = 0.7;
  double n = eval_numeric(qs.numerator, {{"x", at}});
  double d = eval_numeric(qs.denominator, {{"x", at}});
  CHECK(n / d == doctest::Approx(eval_numeric(s, {{"x", at}})).epsilon(1e-12));
}

TEST_CASE("property: canonicalization idempotence") {
  ExprGen gen(12345, true);
  for (int i = 0; i < 200; ++i) {
    Expr e = gen.gen(4);
    CHECK(substitute(e, {}) == e);
  }
}

TEST_CASE("property: differentiate is linear") {
  ExprGen gen(777, true);
  for (int i = 0; i < 100; ++i) {
    Expr e1 = gen.gen(3), e2 = gen.gen(3);
    Rational a = gen.small_rational(), b = gen.small_rational();
    Expr lhs = differentiate(Expr::constant(a) * e1 + Expr::constant(b) * e2, "x");
    Expr rhs = Expr::constant(a) * differentiate(e1, "x") +
               Expr::constant(b) * differentiate(e2, "x");
    CHECK(lhs == rhs);
  }
}

TEST_CASE("property: eval_exact agrees with to_ratfunc on sqrt-free expressions") {
  ExprGen gen(4242, false);
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    Expr e = gen.gen(4);
    RatFuncQ f = to_ratfunc(e, "x");
    for (int j = 0; j < 8; ++j) {
      Rational x(num(rng), den(rng));
      try {
        Rational direct = eval_exact(e, {{"x", x}});
        Rational via = f(x);
        CHECK(direct == via);
        ++checked;
        break;
      } catch (const error&) {
        // pole at the sample point; try another
      }
    }
  }
  CHECK(checked >= 150);
}

TEST_CASE("property: differentiate matches central finite differences") {
  ExprGen gen(31337, true);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> xs(0.3, 2.5);
  int total_points = 0;
  for (int i = 0; i < 40; ++i) {
    Expr e = gen.gen(3);
    Expr de = differentiate(e, "x");
    int points = 0;
    for (int j = 0; j < 60 && points < 20; ++j) {
      double x = xs(rng), h = 1e-6;
      try {
        auto fd_at = [&](double step) {
          double fp = eval_numeric(e, {{"x", x + step}});
          double fm = eval_numeric(e, {{"x", x - step}});
          return (fp - fm) / (2 * step);
        };
        double fd = fd_at(h);
        double d = eval_numeric(de, {{"x", x}});
        double scale = std::max({std::fabs(d), std::fabs(fd), 1e-3});
        if (std::fabs(fd) > 1e6) continue;  // too close to a pole for FD accuracy
        // only keep sample points where the difference quotient itself has
        // converged (filters curvature-dominated draws near poles)
        if (std::fabs(fd - fd_at(2 * h)) > 1e-8 * scale) continue;
        CHECK(std::fabs(d - fd) <= 1e-6 * scale);
        ++points;
      } catch (const error&) {
        // pole or negative radicand at the sample; skip
      }
    }
    total_points += points;
  }
  CHECK(total_points >= 400);
}

TEST_CASE("property: quotient_normal_form denominator matches to_ratfunc") {
  ExprGen gen(2024, false);
  for (int i = 0; i < 20; ++i) {
    Expr e = gen.gen(4);
    QuotientForm q = quotient_normal_form(e);
    RatFuncQ whole = to_ratfunc(e, "x");
    RatFuncQ dq = to_ratfunc(q.denominator, "x");
    CHECK(dq.is_polynomial());
    // den of the reduced form divides the QNF denominator exactly
    auto [quot, rem] = divmod(dq.num(), whole.den());
    CHECK(rem.is_zero());
    // and the quotient pair reproduces the value
    RatFuncQ nq = to_ratfunc(q.numerator, "x");
    CHECK(nq / dq == whole);
  }
}

namespace {

bool has_negative_power(const Expr& e) {
  if (e.kind() == ExprKind::power && e.exponent() < 0) return true;
  for (const Expr& k : e.children())
    if (has_negative_power(k)) return true;
  return false;
}

}  // namespace

TEST_CASE("property: quotient_normal_form output carries no negative powers") {
  ExprGen gen(515, true);
  for (int i = 0; i < 60; ++i) {
    Expr e = gen.gen(4);
    QuotientForm q = quotient_normal_form(e);
    CHECK(!has_negative_power(q.numerator));
    CHECK(!has_negative_power(q.denominator));
  }
}
