#pragma once

#include "canard/expr_bridge.hpp"
#include "canard/ratfunc.hpp"
#include "canard/ring_eval.hpp"

namespace canard {

/// Power series in one expansion variable, truncated at a fixed order K
/// (exactly K+1 coefficient slots; trailing zeros permitted). Binary
/// operations truncate to the smaller operand order.
template <class C>
class PowerSeries {
 public:
  explicit PowerSeries(std::size_t order) : c_(order + 1, field_traits<C>::zero()) {}

  static PowerSeries constant(C value, std::size_t order) {
    PowerSeries s(order);
    s.c_[0] = std::move(value);
    return s;
  }
  /// The expansion variable itself.
  static PowerSeries expansion_var(std::size_t order) {
    PowerSeries s(order);
    if (order >= 1) s.c_[1] = field_traits<C>::one();
    return s;
  }

  std::size_t order() const { return c_.size() - 1; }
  const std::vector<C>& coeffs() const { return c_; }
  const C& at(std::size_t i) const { return c_[i]; }
  C& at(std::size_t i) { return c_[i]; }

  bool is_zero() const {
    for (const C& c : c_)
      if (!field_traits<C>::is_zero(c)) return false;
    return true;
  }

  PowerSeries truncated(std::size_t new_order) const {
    PowerSeries out(new_order);
    for (std::size_t i = 0; i <= new_order && i < c_.size(); ++i) out.c_[i] = c_[i];
    return out;
  }

  friend PowerSeries operator+(const PowerSeries& a, const PowerSeries& b) {
    std::size_t k = std::min(a.order(), b.order());
    PowerSeries out(k);
    for (std::size_t i = 0; i <= k; ++i) out.c_[i] = a.c_[i] + b.c_[i];
    return out;
  }
  friend PowerSeries operator-(const PowerSeries& a, const PowerSeries& b) {
    std::size_t k = std::min(a.order(), b.order());
    PowerSeries out(k);
    for (std::size_t i = 0; i <= k; ++i) out.c_[i] = a.c_[i] - b.c_[i];
    return out;
  }
  PowerSeries operator-() const {
    PowerSeries out(order());
    for (std::size_t i = 0; i < c_.size(); ++i) out.c_[i] = field_traits<C>::zero() - c_[i];
    return out;
  }
  friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
    std::size_t k = std::min(a.order(), b.order());
    PowerSeries out(k);
    for (std::size_t i = 0; i <= k; ++i)
      for (std::size_t j = 0; i + j <= k; ++j)
        out.c_[i + j] = out.c_[i + j] + a.c_[i] * b.c_[j];
    return out;
  }

  PowerSeries reciprocal() const {
    if (field_traits<C>::is_zero(c_[0]))
      fail(errc::zero_leading_coefficient, "series reciprocal with zero order-0 coefficient");
    PowerSeries out(order());
    C inv0 = field_traits<C>::inverse(c_[0]);
    out.c_[0] = inv0;
    for (std::size_t n = 1; n < c_.size(); ++n) {
      C acc = field_traits<C>::zero();
      for (std::size_t i = 1; i <= n; ++i) acc = acc + c_[i] * out.c_[n - i];
      out.c_[n] = field_traits<C>::zero() - inv0 * acc;
    }
    return out;
  }

  PowerSeries pow(long e) const {
    PowerSeries base = e >= 0 ? *this : reciprocal();
    unsigned long n = e >= 0 ? e : -e;
    PowerSeries acc = constant(field_traits<C>::one(), order());
    while (n) {
      if (n & 1) acc = acc * base;
      base = base * base;
      n >>= 1;
    }
    return acc;
  }

  friend bool operator==(const PowerSeries& a, const PowerSeries& b) {
    if (a.order() != b.order()) return false;
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      if (!field_traits<C>::is_zero(a.c_[i] - b.c_[i])) return false;
    return true;
  }

  /// Applies f to every coefficient (e.g. d/dx on RatFunc coefficients).
  template <class F>
  PowerSeries map(F f) const {
    PowerSeries out(order());
    for (std::size_t i = 0; i < c_.size(); ++i) out.c_[i] = f(c_[i]);
    return out;
  }

 private:
  std::vector<C> c_;
};

/// The series type of the canard machinery: coefficients are rational
/// functions of the slow variable, the expansion variable is the
/// perturbation parameter.
using ParamSeries = PowerSeries<RatFuncQ>;
using RationalSeries = PowerSeries<Rational>;

/// Ring ops for expanding an Expr into a truncated power series.
template <class C>
struct SeriesOps {
  using value_type = PowerSeries<C>;
  std::size_t order;

  value_type from_rational(const Rational& q) const {
    return value_type::constant(field_traits<C>::from_rational(q), order);
  }
  value_type add(const value_type& a, const value_type& b) const { return a + b; }
  value_type mul(const value_type& a, const value_type& b) const { return a * b; }
  value_type pow(const value_type& a, long e) const { return a.pow(e); }
  [[noreturn]] value_type sqrt(const value_type&) const {
    fail(errc::sqrt_present, "sqrt node in series expansion");
  }
  [[noreturn]] value_type unbound(const std::string& name) const {
    fail(errc::internal, "unbound variable '" + name + "' in series expansion");
  }
};

/// Taylor expansion of a rational function around 0 (den(0) must not vanish).
inline RationalSeries taylor_series(const RatFuncQ& f, std::size_t order) {
  RationalSeries num(order), den(order);
  for (std::size_t i = 0; i <= order; ++i) {
    num.at(i) = f.num().coeff(i);
    den.at(i) = f.den().coeff(i);
  }
  if (den.at(0).is_zero())
    fail(errc::pole_at_point, "Taylor expansion around a pole");
  return num * den.reciprocal();
}

}  // namespace canard
