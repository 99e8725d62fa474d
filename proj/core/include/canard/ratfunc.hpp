#pragma once

#include "canard/poly.hpp"

namespace canard {

/// Reduced rational function num/den over a field K. Over an exact field the
/// representation is canonical: gcd(num, den) = 1 and den monic, so equality
/// is structural. Over double the gcd step is skipped (reduction happens only
/// through explicit root deflation) and den is normalized to leading
/// coefficient 1.
template <class K>
class RatFunc {
 public:
  RatFunc() : num_(), den_(Poly<K>(field_traits<K>::one())) {}
  explicit RatFunc(K constant) : RatFunc(Poly<K>(std::move(constant))) {}
  explicit RatFunc(Poly<K> p) : num_(std::move(p)), den_(Poly<K>(field_traits<K>::one())) {}
  RatFunc(Poly<K> num, Poly<K> den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) fail(errc::division_by_zero, "rational function with zero denominator");
    reduce();
  }

  static RatFunc x() { return RatFunc(Poly<K>::x()); }
  static RatFunc from_rational(const Rational& q) {
    return RatFunc(field_traits<K>::from_rational(q));
  }

  const Poly<K>& num() const { return num_; }
  const Poly<K>& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.degree() == 0; }

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b) {
    if (a.den_ == b.den_) return RatFunc(a.num_ + b.num_, a.den_);
    return RatFunc(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b) {
    if (a.den_ == b.den_) return RatFunc(a.num_ - b.num_, a.den_);
    return RatFunc(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  RatFunc operator-() const {
    RatFunc r = *this;
    r.num_ = -r.num_;
    return r;
  }
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b) {
    return RatFunc(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b) {
    if (b.is_zero()) fail(errc::division_by_zero, "division by zero rational function");
    return RatFunc(a.num_ * b.den_, a.den_ * b.num_);
  }

  RatFunc reciprocal() const {
    if (is_zero()) fail(errc::division_by_zero, "reciprocal of zero rational function");
    return RatFunc(den_, num_);
  }

  RatFunc pow(long e) const {
    if (e == 0) return RatFunc(field_traits<K>::one());
    RatFunc base = e > 0 ? *this : reciprocal();
    unsigned long n = e > 0 ? e : -e;
    RatFunc acc(field_traits<K>::one());
    while (n) {
      if (n & 1) acc = acc * base;
      base = base * base;
      n >>= 1;
    }
    return acc;
  }

  /// Quotient rule; result reduced.
  RatFunc derivative() const {
    return RatFunc(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
  }

  K operator()(const K& at) const {
    K d = den_(at);
    if (field_traits<K>::is_zero(d)) fail(errc::pole_at_point, "pole at evaluation point");
    return num_(at) * field_traits<K>::inverse(d);
  }

  friend bool operator==(const RatFunc& a, const RatFunc& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const RatFunc& a, const RatFunc& b) { return !(a == b); }

 private:
  Poly<K> num_, den_;

  void reduce() {
    if (num_.is_zero()) {
      den_ = Poly<K>(field_traits<K>::one());
      return;
    }
    if constexpr (field_traits<K>::exact) {
      Poly<K> g = gcd(num_, den_);
      if (g.degree() > 0) {
        num_ = exact_divide(num_, g);
        den_ = exact_divide(den_, g);
      }
    }
    K inv = field_traits<K>::inverse(den_.leading());
    num_ = inv * num_;
    den_ = inv * den_;
  }
};

template <class K>
struct field_traits<RatFunc<K>> {
  static RatFunc<K> zero() { return RatFunc<K>(); }
  static RatFunc<K> one() { return RatFunc<K>(field_traits<K>::one()); }
  static RatFunc<K> from_rational(const Rational& q) { return RatFunc<K>::from_rational(q); }
  static bool is_zero(const RatFunc<K>& x) { return x.is_zero(); }
  static RatFunc<K> inverse(const RatFunc<K>& x) { return x.reciprocal(); }
  static constexpr bool exact = field_traits<K>::exact;
};

using RatFuncQ = RatFunc<Rational>;
using RatFuncD = RatFunc<double>;

inline RatFuncD to_double(const RatFuncQ& f) {
  return RatFuncD(to_double(f.num()), to_double(f.den()));
}

inline double eval_double(const RatFuncQ& f, double x) {
  double d = eval_double(f.den(), x);
  if (d == 0.0) fail(errc::pole_at_point, "pole at evaluation point");
  return eval_double(f.num(), x) / d;
}

template <class K>
std::string ratfunc_to_string(const RatFunc<K>& f, const std::string& var) {
  if (f.is_polynomial() && f.den().coeffs().size() == 1 &&
      field_traits<K>::is_zero(f.den().coeff(0) - field_traits<K>::one()))
    return poly_to_string(f.num(), var);
  return "(" + poly_to_string(f.num(), var) + ") / (" + poly_to_string(f.den(), var) + ")";
}

}  // namespace canard
