#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "canard/errors.hpp"

namespace canard {

/// Exact rational number. Thin wrapper around GMP's mpq_class that keeps the
/// value canonical (positive denominator, gcd(num, den) = 1) at all times.
class Rational {
 public:
  Rational() : q_(0) {}
  Rational(long n) : q_(n) {}
  Rational(long num, long den);
  explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }
  explicit Rational(const mpz_class& num, const mpz_class& den);

  /// Parses "123", "-4/7" or a decimal literal like "0.419940" (converted
  /// exactly, e.g. 0.01 -> 1/100).
  static Rational from_string(const std::string& text);

  /// Exact conversion of a binary64 value (every finite double is a dyadic
  /// rational).
  static Rational from_double(double x);

  const mpz_class& num() const { return q_.get_num(); }
  const mpz_class& den() const { return q_.get_den(); }

  bool is_zero() const { return sgn(q_) == 0; }
  bool is_one() const { return q_ == 1; }
  bool is_integer() const { return q_.get_den() == 1; }
  int sign() const { return sgn(q_); }

  double to_double() const { return q_.get_d(); }
  std::string to_string() const;

  Rational operator-() const { return Rational(mpq_class(-q_)); }
  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.q_ != b.q_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.q_ < b.q_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.q_ <= b.q_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.q_ > b.q_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.q_ >= b.q_; }

  Rational inverse() const;
  Rational abs() const { return Rational(mpq_class(::abs(q_))); }

  /// Integer power; negative exponents invert (pole on zero base).
  Rational pow(long e) const;

  friend std::ostream& operator<<(std::ostream& os, const Rational& r);

 private:
  mpq_class q_;
};

int compare(const Rational& a, const Rational& b);

/// Midpoint of two rationals.
inline Rational midpoint(const Rational& a, const Rational& b) {
  return (a + b) / Rational(2);
}

/// Simplest rational (smallest denominator, then smallest numerator) in the
/// closed interval [lo, hi], via the Stern-Brocot walk. Used to recognize
/// exact rational roots from isolating intervals.
Rational simplest_in_interval(const Rational& lo, const Rational& hi);

}  // namespace canard
