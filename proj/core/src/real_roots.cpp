#include "canard/real_roots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace canard {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

namespace {

// p(x + a)
PolyQ taylor_shift(const PolyQ& p, const Rational& a) {
  if (a.is_zero() || p.is_zero()) return p;
  // Synthetic Horner: repeatedly divide by (x - (-a))... equivalently build
  // coefficients of p(x+a) by nested multiply-add.
  std::vector<Rational> out(p.coeffs().size(), Rational(0));
  for (int i = p.degree(); i >= 0; --i) {
    // out = out * (x + a) + c_i  ... done in place, low to high
    for (size_t j = out.size() - 1; j > 0; --j) out[j] = out[j - 1] + a * out[j];
    out[0] = a * out[0] + p.coeff(i);
  }
  return PolyQ::from_coeffs(std::move(out));
}

// p(s * x)
PolyQ scale_arg(const PolyQ& p, const Rational& s) {
  std::vector<Rational> out(p.coeffs().begin(), p.coeffs().end());
  Rational f(1);
  for (size_t i = 1; i < out.size(); ++i) {
    f *= s;
    out[i] *= f;
  }
  return PolyQ::from_coeffs(std::move(out));
}

// x^deg * p(1/x)
PolyQ reverse_coeffs(const PolyQ& p) {
  std::vector<Rational> out(p.coeffs().rbegin(), p.coeffs().rend());
  return PolyQ::from_coeffs(std::move(out));
}

int sign_variations(const PolyQ& p) {
  int v = 0, last = 0;
  for (const Rational& c : p.coeffs()) {
    int s = c.sign();
    if (s == 0) continue;
    if (last != 0 && s != last) ++v;
    last = s;
  }
  return v;
}

// Descartes bound on the number of roots of p in the open interval (a, b):
// sign variations of (1+x)^n p((a + b x)/(1 + x)).
int descartes_bound(const PolyQ& p, const Rational& a, const Rational& b) {
  PolyQ q = scale_arg(taylor_shift(p, a), b - a);  // q(x) = p(a + (b-a) x)
  PolyQ w = taylor_shift(reverse_coeffs(q), Rational(1));
  return sign_variations(w);
}

struct Isolator {
  PolyQ g;  // squarefree; exact roots are deflated out as they are found
  const RootOptions& opts;
  std::vector<RealRoot> found;
  int depth_guard = 0;

  void emit_exact(const Rational& r) {
    RealRoot root;
    root.lo = root.hi = r;
    root.mid = r.to_double();
    root.exact = true;
    root.value = r;
    found.push_back(std::move(root));
    g = deflate_root(g, r);
  }

  // open interval (a, b), g(a) != 0, g(b) != 0
  void isolate(const Rational& a, const Rational& b) {
    if (++depth_guard > 4000) fail(errc::internal, "root isolation did not terminate");
    if (g.degree() < 1) return;
    int v = descartes_bound(g, a, b);
    if (v == 0) return;
    if (v == 1) {
      refine(a, b);
      return;
    }
    Rational m = midpoint(a, b);
    if (g(m).is_zero()) emit_exact(m);
    isolate(a, m);
    isolate(m, b);
  }

  // (a, b) contains exactly one simple root; endpoint values nonzero
  void refine(Rational a, Rational b) {
    int sa = g(a).sign();
    while (b - a > opts.width) {
      Rational m = midpoint(a, b);
      int sm = g(m).sign();
      if (sm == 0) {
        emit_exact(m);
        return;
      }
      if (sm == sa)
        a = m;
      else
        b = m;
    }
    if (opts.recognize_rational) {
      Rational r = simplest_in_interval(a, b);
      if (g(r).is_zero()) {
        emit_exact(r);
        return;
      }
    }
    RealRoot root;
    root.lo = a;
    root.hi = b;
    root.mid = midpoint(a, b).to_double();
    found.push_back(std::move(root));
  }
};

}  // namespace

std::vector<RealRoot> real_roots(const PolyQ& p, const Rational& lo, const Rational& hi,
                                 const RootOptions& opts) {
  if (p.is_zero()) fail(errc::internal, "real_roots of the zero polynomial");
  std::vector<RealRoot> out;
  if (p.degree() == 0 || hi < lo) return out;

  for (const auto& [factor, mult] : squarefree_decomposition(p)) {
    Isolator iso{factor, opts, {}, 0};
    if (factor(lo).is_zero()) iso.emit_exact(lo);
    if (hi != lo && iso.g.degree() >= 1 && iso.g(hi).is_zero()) iso.emit_exact(hi);
    iso.isolate(lo, hi);
    for (RealRoot& r : iso.found) {
      r.multiplicity = mult;
      out.push_back(std::move(r));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const RealRoot& a, const RealRoot& b) { return a.lo < b.lo; });
  return out;
}

namespace {

Rational cauchy_bound(const PolyQ& p) {
  Rational m(0);
  Rational lead = p.leading().abs();
  for (int i = 0; i < p.degree(); ++i) {
    Rational a = p.coeff(i).abs() / lead;
    if (a > m) m = a;
  }
  return m + Rational(1);
}

}  // namespace

std::vector<RealRoot> real_roots(const PolyQ& p, const RootOptions& opts) {
  if (p.is_zero()) fail(errc::internal, "real_roots of the zero polynomial");
  if (p.degree() == 0) return {};
  Rational bound = cauchy_bound(p);
  return real_roots(p, -bound, bound, opts);
}

PolyQ poly_gcd(const PolyQ& a, const PolyQ& b) { return gcd(a, b); }

PolyQ deflate_root(const PolyQ& p, const Rational& root) {
  if (!p(root).is_zero())
    fail(errc::inexact_deflation, "(x - " + root.to_string() + ") does not divide p");
  // synthetic division
  std::vector<Rational> out(p.degree(), Rational(0));
  Rational carry(0);
  for (int i = p.degree(); i >= 1; --i) {
    carry = p.coeff(i) + root * carry;
    out[i - 1] = carry;
  }
  return PolyQ::from_coeffs(std::move(out));
}

NumericDeflation deflate_root(const PolyD& p, double root, double tol) {
  if (p.is_zero()) fail(errc::inexact_deflation, "deflation of zero polynomial");
  std::vector<double> out(std::max(p.degree(), 0), 0.0);
  double carry = 0.0;
  for (int i = p.degree(); i >= 1; --i) {
    carry = p.coeff(i) + root * carry;
    out[i - 1] = carry;
  }
  double remainder = p.coeff(0) + root * carry;
  double scale = 0.0;
  for (double c : p.coeffs()) scale = std::max(scale, std::fabs(c));
  double residual = std::fabs(remainder) / std::max(scale, 1e-300);
  if (residual > tol)
    fail(errc::inexact_deflation,
         "relative residual " + format_double(residual) + " exceeds tolerance");
  return {PolyD::from_coeffs(std::move(out)), residual};
}

std::vector<double> scan_roots(const PolyD& p, double lo, double hi, int panels, double tol) {
  std::vector<double> roots;
  if (p.is_zero() || p.degree() < 1 || !(lo < hi)) return roots;
  double prev_x = lo, prev_f = p(lo);
  for (int i = 1; i <= panels; ++i) {
    double x = lo + (hi - lo) * i / panels;
    double f = p(x);
    if (prev_f == 0.0) {
      roots.push_back(prev_x);
    } else if (f != 0.0 && std::signbit(f) != std::signbit(prev_f)) {
      double a = prev_x, b = x, fa = prev_f;
      for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        double m = 0.5 * (a + b);
        double fm = p(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if (std::signbit(fm) == std::signbit(fa)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_f = f;
  }
  if (prev_f == 0.0) roots.push_back(prev_x);
  // drop duplicates from roots landing on panel edges
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double a, double b) { return std::fabs(a - b) < 4 * tol; }),
              roots.end());
  return roots;
}

std::vector<CollisionPoint> discriminant_vanishes(const Poly<RatFuncQ>& family) {
  std::vector<CollisionPoint> out;
  if (family.degree() < 2) return out;
  RatFuncQ res = resultant(family, family.derivative());
  if (res.is_zero()) return out;  // multiple root at every parameter: degenerate
  PolyQ res_num = res.num();
  if (res_num.degree() < 1) return out;

  for (const RealRoot& pr : real_roots(res_num)) {
    CollisionPoint cp;
    cp.parameter = pr;
    if (pr.exact) {
      std::vector<Rational> cs;
      cs.reserve(family.coeffs().size());
      for (const RatFuncQ& c : family.coeffs()) cs.push_back(c(pr.value));
      PolyQ at = PolyQ::from_coeffs(std::move(cs));
      if (at.degree() >= 1) {
        PolyQ g = gcd(at, at.derivative());
        if (g.degree() >= 1) cp.abscissae = real_roots(g);
      }
    } else {
      std::vector<double> cs;
      cs.reserve(family.coeffs().size());
      for (const RatFuncQ& c : family.coeffs()) cs.push_back(eval_double(c, pr.mid));
      PolyD at = PolyD::from_coeffs(std::move(cs));
      if (at.degree() >= 1) {
        PolyD der = at.derivative();
        double scale = 0.0;
        for (double c : at.coeffs()) scale = std::max(scale, std::fabs(c));
        double lo = -1.0, hi = 1.0;
        if (at.degree() >= 1) {
          double bound = 1.0;
          for (int i = 0; i < at.degree(); ++i)
            bound = std::max(bound, std::fabs(at.coeff(i) / at.leading()));
          lo = -bound - 1;
          hi = bound + 1;
        }
        for (double r : scan_roots(der, lo, hi))
          if (std::fabs(at(r)) <= 1e-7 * std::max(scale, 1.0)) cp.abscissae_approx.push_back(r);
      }
    }
    out.push_back(std::move(cp));
  }
  return out;
}

}  // namespace canard
