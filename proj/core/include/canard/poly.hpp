#pragma once

#include <string>
#include <utility>
#include <vector>

#include "canard/rational.hpp"

namespace canard {

/// Field concept used by Poly/RatFunc/PowerSeries. `exact` distinguishes
/// coefficient fields where gcd reduction and equality are meaningful
/// (Rational, RatFunc<Rational>, ...) from double.
template <class K>
struct field_traits;

template <>
struct field_traits<Rational> {
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static Rational from_rational(const Rational& q) { return q; }
  static bool is_zero(const Rational& x) { return x.is_zero(); }
  static Rational inverse(const Rational& x) { return x.inverse(); }
  static constexpr bool exact = true;
};

template <>
struct field_traits<double> {
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double from_rational(const Rational& q) { return q.to_double(); }
  static bool is_zero(double x) { return x == 0.0; }
  static double inverse(double x) { return 1.0 / x; }
  static constexpr bool exact = false;
};

/// Dense univariate polynomial over a field K; coefficient index = degree,
/// leading coefficient nonzero (zero polynomial = empty list).
template <class K>
class Poly {
 public:
  Poly() = default;
  explicit Poly(K constant) {
    if (!field_traits<K>::is_zero(constant)) c_.push_back(std::move(constant));
  }

  static Poly x() {
    return from_coeffs({field_traits<K>::zero(), field_traits<K>::one()});
  }
  static Poly from_coeffs(std::vector<K> coeffs) {
    Poly p;
    p.c_ = std::move(coeffs);
    p.trim();
    return p;
  }
  static Poly monomial(K coeff, std::size_t deg) {
    if (field_traits<K>::is_zero(coeff)) return Poly();
    Poly p;
    p.c_.assign(deg + 1, field_traits<K>::zero());
    p.c_[deg] = std::move(coeff);
    return p;
  }

  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<K>& coeffs() const { return c_; }
  K coeff(std::size_t i) const {
    return i < c_.size() ? c_[i] : field_traits<K>::zero();
  }
  const K& leading() const {
    if (is_zero()) fail(errc::internal, "leading coefficient of zero polynomial");
    return c_.back();
  }
  bool is_constant() const { return c_.size() <= 1; }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<K> out(std::max(a.c_.size(), b.c_.size()), field_traits<K>::zero());
    for (size_t i = 0; i < a.c_.size(); ++i) out[i] = out[i] + a.c_[i];
    for (size_t i = 0; i < b.c_.size(); ++i) out[i] = out[i] + b.c_[i];
    return from_coeffs(std::move(out));
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  Poly operator-() const {
    Poly p = *this;
    for (K& c : p.c_) c = field_traits<K>::zero() - c;
    return p;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    std::vector<K> out(a.c_.size() + b.c_.size() - 1, field_traits<K>::zero());
    for (size_t i = 0; i < a.c_.size(); ++i)
      for (size_t j = 0; j < b.c_.size(); ++j) out[i + j] = out[i + j] + a.c_[i] * b.c_[j];
    return from_coeffs(std::move(out));
  }
  friend Poly operator*(const K& s, const Poly& p) {
    Poly out = p;
    for (K& c : out.c_) c = s * c;
    out.trim();
    return out;
  }

  friend bool operator==(const Poly& a, const Poly& b) {
    if (a.c_.size() != b.c_.size()) return false;
    for (size_t i = 0; i < a.c_.size(); ++i)
      if (!field_traits<K>::is_zero(a.c_[i] - b.c_[i])) return false;
    return true;
  }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<K> out(c_.size() - 1, field_traits<K>::zero());
    for (size_t i = 1; i < c_.size(); ++i) {
      K n = field_traits<K>::from_rational(Rational(static_cast<long>(i)));
      out[i - 1] = n * c_[i];
    }
    return from_coeffs(std::move(out));
  }

  /// Horner evaluation at a point.
  K operator()(const K& at) const {
    K acc = field_traits<K>::zero();
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * at + *it;
    return acc;
  }

  Poly monic() const {
    if (is_zero()) return *this;
    K inv = field_traits<K>::inverse(leading());
    return inv * *this;
  }

  Poly pow(unsigned n) const {
    Poly result(field_traits<K>::one());
    Poly base = *this;
    while (n) {
      if (n & 1) result = result * base;
      base = base * base;
      n >>= 1;
    }
    return result;
  }

 private:
  std::vector<K> c_;
  void trim() {
    while (!c_.empty() && field_traits<K>::is_zero(c_.back())) c_.pop_back();
  }
};

/// Polynomial division over a field: returns (quotient, remainder).
template <class K>
std::pair<Poly<K>, Poly<K>> divmod(const Poly<K>& a, const Poly<K>& b) {
  if (b.is_zero()) fail(errc::division_by_zero, "polynomial division by zero");
  std::vector<K> rem(a.coeffs());
  int db = b.degree();
  if (a.degree() < db) return {Poly<K>(), a};
  std::vector<K> quot(a.degree() - db + 1, field_traits<K>::zero());
  K lead_inv = field_traits<K>::inverse(b.leading());
  for (int i = a.degree(); i >= db; --i) {
    K c = rem[i] * lead_inv;
    if (field_traits<K>::is_zero(c)) continue;
    quot[i - db] = c;
    for (int j = 0; j <= db; ++j) rem[i - db + j] = rem[i - db + j] - c * b.coeff(j);
  }
  return {Poly<K>::from_coeffs(std::move(quot)), Poly<K>::from_coeffs(std::move(rem))};
}

/// Exact division; the remainder must vanish.
template <class K>
Poly<K> exact_divide(const Poly<K>& a, const Poly<K>& b) {
  auto [q, r] = divmod(a, b);
  if (!r.is_zero()) fail(errc::internal, "exact_divide with nonzero remainder");
  return q;
}

/// Monic gcd by the Euclidean algorithm (exact coefficient fields only).
template <class K>
Poly<K> gcd(Poly<K> a, Poly<K> b) {
  static_assert(field_traits<K>::exact, "gcd requires an exact coefficient field");
  while (!b.is_zero()) {
    auto [q, r] = divmod(a, b);
    a = std::move(b);
    b = r.monic();  // normalize to keep coefficient growth in check
  }
  return a.monic();
}

template <class K>
Poly<K> lcm(const Poly<K>& a, const Poly<K>& b) {
  if (a.is_zero() || b.is_zero()) return Poly<K>();
  return exact_divide(a * b, gcd(a, b)).monic();
}

/// p / gcd(p, p'): same roots, all simple.
template <class K>
Poly<K> squarefree_part(const Poly<K>& p) {
  if (p.degree() <= 1) return p.monic();
  return exact_divide(p, gcd(p, p.derivative())).monic();
}

/// Yun's algorithm: returns (factor, multiplicity) pairs with the factors
/// squarefree, pairwise coprime, and product(factor^multiplicity) = monic(p).
template <class K>
std::vector<std::pair<Poly<K>, int>> squarefree_decomposition(Poly<K> p) {
  std::vector<std::pair<Poly<K>, int>> out;
  p = p.monic();
  if (p.degree() < 1) return out;
  Poly<K> g = gcd(p, p.derivative());
  Poly<K> w = exact_divide(p, g);
  Poly<K> y = exact_divide(p.derivative(), g);
  Poly<K> z = y - w.derivative();
  int mult = 1;
  while (!z.is_zero()) {
    Poly<K> f = gcd(w, z);
    if (f.degree() > 0) out.emplace_back(f.monic(), mult);
    w = exact_divide(w, f);
    y = exact_divide(z, f);
    z = y - w.derivative();
    ++mult;
  }
  if (w.degree() > 0) out.emplace_back(w.monic(), mult);
  return out;
}

/// Resultant via Gaussian elimination on the Sylvester matrix (exact fields).
template <class K>
K resultant(const Poly<K>& a, const Poly<K>& b) {
  static_assert(field_traits<K>::exact, "resultant requires an exact coefficient field");
  if (a.is_zero() || b.is_zero()) return field_traits<K>::zero();
  int m = a.degree(), n = b.degree();
  auto kpow = [](K base, int e) {
    K acc = field_traits<K>::one();
    for (int i = 0; i < e; ++i) acc = acc * base;
    return acc;
  };
  if (m == 0) return kpow(a.leading(), n);
  if (n == 0) return kpow(b.leading(), m);
  const int size = m + n;
  std::vector<std::vector<K>> mat(size, std::vector<K>(size, field_traits<K>::zero()));
  for (int r = 0; r < n; ++r)
    for (int j = 0; j <= m; ++j) mat[r][r + (m - j)] = a.coeff(j);
  for (int r = 0; r < m; ++r)
    for (int j = 0; j <= n; ++j) mat[n + r][r + (n - j)] = b.coeff(j);

  K det = field_traits<K>::one();
  for (int col = 0; col < size; ++col) {
    int pivot = -1;
    for (int r = col; r < size; ++r)
      if (!field_traits<K>::is_zero(mat[r][col])) {
        pivot = r;
        break;
      }
    if (pivot < 0) return field_traits<K>::zero();
    if (pivot != col) {
      std::swap(mat[pivot], mat[col]);
      det = field_traits<K>::zero() - det;
    }
    det = det * mat[col][col];
    K inv = field_traits<K>::inverse(mat[col][col]);
    for (int r = col + 1; r < size; ++r) {
      if (field_traits<K>::is_zero(mat[r][col])) continue;
      K factor = mat[r][col] * inv;
      for (int cc = col; cc < size; ++cc)
        mat[r][cc] = mat[r][cc] - factor * mat[col][cc];
    }
  }
  return det;
}

using PolyQ = Poly<Rational>;
using PolyD = Poly<double>;

inline PolyD to_double(const PolyQ& p) {
  std::vector<double> c;
  c.reserve(p.coeffs().size());
  for (const Rational& q : p.coeffs()) c.push_back(q.to_double());
  return PolyD::from_coeffs(std::move(c));
}

inline double eval_double(const PolyQ& p, double x) {
  double acc = 0.0;
  for (auto it = p.coeffs().rbegin(); it != p.coeffs().rend(); ++it)
    acc = acc * x + it->to_double();
  return acc;
}

namespace detail {

template <class K, class Fmt>
std::string poly_to_string_impl(const Poly<K>& p, const std::string& var, Fmt fmt,
                                auto is_negative, auto negate, auto is_one) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (int i = p.degree(); i >= 0; --i) {
    K c = p.coeff(i);
    if (field_traits<K>::is_zero(c)) continue;
    bool neg = is_negative(c);
    K a = neg ? negate(c) : c;
    std::string term;
    if (i == 0) {
      term = fmt(a);
    } else {
      if (!is_one(a)) term = fmt(a) + "*";
      term += var;
      if (i > 1) term += "^" + std::to_string(i);
    }
    if (first) {
      out = (neg ? "-" : "") + term;
      first = false;
    } else {
      out += (neg ? " - " : " + ") + term;
    }
  }
  return out;
}

}  // namespace detail

inline std::string poly_to_string(const PolyQ& p, const std::string& var) {
  return detail::poly_to_string_impl(
      p, var, [](const Rational& q) { return q.to_string(); },
      [](const Rational& q) { return q.sign() < 0; }, [](const Rational& q) { return -q; },
      [](const Rational& q) { return q.is_one(); });
}

std::string format_double(double x);

inline std::string poly_to_string(const PolyD& p, const std::string& var) {
  return detail::poly_to_string_impl(
      p, var, [](double c) { return format_double(c); }, [](double c) { return c < 0; },
      [](double c) { return -c; }, [](double c) { return c == 1.0; });
}

}  // namespace canard
