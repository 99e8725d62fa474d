#include "canard/rational.hpp"

#include <cctype>
#include <cmath>
#include <ostream>

namespace canard {

const char* errc_name(errc c) {
  switch (c) {
    case errc::syntax_error: return "SyntaxError";
    case errc::unknown_identifier: return "UnknownIdentifier";
    case errc::pole_at_point: return "PoleAtPoint";
    case errc::negative_radicand: return "NegativeRadicand";
    case errc::sqrt_present: return "SqrtPresent";
    case errc::not_rational: return "NotRational";
    case errc::division_by_zero: return "DivisionByZero";
    case errc::zero_leading_coefficient: return "ZeroLeadingCoefficient";
    case errc::inexact_deflation: return "InexactDeflation";
    case errc::not_affine: return "NotAffine";
    case errc::no_solution: return "NoSolution";
    case errc::indeterminate: return "Indeterminate";
    case errc::nonlinear_unknown: return "NonlinearUnknown";
    case errc::no_cancellation: return "NoCancellation";
    case errc::degree_too_high: return "DegreeTooHigh";
    case errc::branch_invalid: return "BranchInvalid";
    case errc::seed_depends_on_parameter: return "SeedDependsOnParameter";
    case errc::multiple_roots_ambiguous: return "MultipleRootsAmbiguous";
    case errc::expression_budget_exceeded: return "ExpressionBudgetExceeded";
    case errc::no_collision: return "NoCollision";
    case errc::step_floor_reached: return "StepFloorReached";
    case errc::non_finite_state: return "NonFiniteState";
    case errc::not_converged: return "NotConverged";
    case errc::same_class_at_endpoints: return "SameClassAtEndpoints";
    case errc::bad_model_file: return "BadModelFile";
    case errc::internal: return "InternalError";
  }
  return "UnknownError";
}

Rational::Rational(long num, long den) : q_(num, den) {
  if (den == 0) fail(errc::division_by_zero, "rational with zero denominator");
  q_.canonicalize();
}

Rational::Rational(const mpz_class& num, const mpz_class& den) : q_(num, den) {
  if (den == 0) fail(errc::division_by_zero, "rational with zero denominator");
  q_.canonicalize();
}

Rational Rational::from_string(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) fail(errc::syntax_error, "empty rational literal");

  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    size_t frac_len = s.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+")
      fail(errc::syntax_error, "bad decimal literal '" + text + "'");
    mpz_class num;
    if (mpz_set_str(num.get_mpz_t(), digits.c_str(), 10) != 0)
      fail(errc::syntax_error, "bad decimal literal '" + text + "'");
    mpz_class den = 1;
    for (size_t i = 0; i < frac_len; ++i) den *= 10;
    return Rational(num, den);
  }

  mpq_class q;
  if (mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0)
    fail(errc::syntax_error, "bad rational literal '" + text + "'");
  if (q.get_den() == 0) fail(errc::division_by_zero, "rational with zero denominator");
  q.canonicalize();
  return Rational(q);
}

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) fail(errc::non_finite_state, "cannot convert non-finite double");
  mpq_class q;
  mpq_set_d(q.get_mpq_t(), x);
  return Rational(q);
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) fail(errc::division_by_zero, "rational division by zero");
  q_ /= o.q_;
  return *this;
}

Rational Rational::inverse() const {
  if (is_zero()) fail(errc::division_by_zero, "inverse of zero");
  return Rational(mpq_class(1) / q_);
}

Rational Rational::pow(long e) const {
  if (e == 0) return Rational(1);
  const Rational base = e > 0 ? *this : inverse();
  unsigned long n = e > 0 ? static_cast<unsigned long>(e) : static_cast<unsigned long>(-e);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.num().get_mpz_t(), n);
  mpz_pow_ui(den.get_mpz_t(), base.den().get_mpz_t(), n);
  return Rational(num, den);
}

std::string Rational::to_string() const {
  std::string s = q_.get_num().get_str();
  if (q_.get_den() != 1) s += "/" + q_.get_den().get_str();
  return s;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.to_string();
}

int compare(const Rational& a, const Rational& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

namespace {

// 0 < lo <= hi
Rational simplest_positive(const Rational& lo, const Rational& hi) {
  mpz_class fl = lo.num() / lo.den();  // floor (operands positive)
  mpz_class cl = (fl * lo.den() == lo.num()) ? fl : fl + 1;  // ceil(lo)
  Rational candidate(cl, mpz_class(1));
  if (candidate <= hi) return candidate;  // an integer lies in the interval
  // floor(lo) == floor(hi), both fractional: recurse on reciprocal tails.
  Rational whole(fl, mpz_class(1));
  Rational tail = simplest_positive((hi - whole).inverse(), (lo - whole).inverse());
  return whole + tail.inverse();
}

}  // namespace

Rational simplest_in_interval(const Rational& lo, const Rational& hi) {
  if (hi < lo) return simplest_in_interval(hi, lo);
  if (lo.sign() <= 0 && hi.sign() >= 0) return Rational(0);
  if (hi.sign() < 0) return -simplest_positive(-hi, -lo);
  return simplest_positive(lo, hi);
}

}  // namespace canard
