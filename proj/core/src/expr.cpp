#include "canard/expr.hpp"

#include <algorithm>
#include <sstream>

#include "canard/ring_eval.hpp"

namespace canard {

struct Expr::Node {
  ExprKind kind = ExprKind::constant;
  Rational value;
  std::string name;
  std::vector<Expr> kids;
  long exponent = 0;
};

namespace {

int kind_rank(ExprKind k) {
  switch (k) {
    case ExprKind::constant: return 0;
    case ExprKind::variable: return 1;
    case ExprKind::power: return 2;
    case ExprKind::product: return 3;
    case ExprKind::sum: return 4;
    case ExprKind::sqrt_: return 5;
  }
  return 6;
}

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

}  // namespace

Expr Expr::raw(Node node) { return Expr(std::make_shared<const Node>(std::move(node))); }

ExprKind Expr::kind() const { return node_->kind; }

const Rational& Expr::value() const {
  if (kind() != ExprKind::constant) fail(errc::internal, "value() on non-constant");
  return node_->value;
}

const std::string& Expr::name() const {
  if (kind() != ExprKind::variable) fail(errc::internal, "name() on non-variable");
  return node_->name;
}

const std::vector<Expr>& Expr::children() const { return node_->kids; }

long Expr::exponent() const {
  if (kind() != ExprKind::power) fail(errc::internal, "exponent() on non-power");
  return node_->exponent;
}

int compare(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return 0;
  int ra = kind_rank(a.kind()), rb = kind_rank(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind()) {
    case ExprKind::constant:
      return compare(a.value(), b.value());
    case ExprKind::variable: {
      int c = a.name().compare(b.name());
      return c < 0 ? -1 : c > 0 ? 1 : 0;
    }
    case ExprKind::power: {
      int c = compare(a.children()[0], b.children()[0]);
      if (c != 0) return c;
      return a.exponent() < b.exponent() ? -1 : a.exponent() > b.exponent() ? 1 : 0;
    }
    case ExprKind::sqrt_:
      return compare(a.children()[0], b.children()[0]);
    case ExprKind::sum:
    case ExprKind::product: {
      const auto& ka = a.children();
      const auto& kb = b.children();
      size_t n = std::min(ka.size(), kb.size());
      for (size_t i = 0; i < n; ++i) {
        int c = compare(ka[i], kb[i]);
        if (c != 0) return c;
      }
      return ka.size() < kb.size() ? -1 : ka.size() > kb.size() ? 1 : 0;
    }
  }
  return 0;
}

Expr Expr::constant(Rational value) {
  Node n;
  n.kind = ExprKind::constant;
  n.value = std::move(value);
  return raw(std::move(n));
}

Expr Expr::variable(std::string name) {
  Node n;
  n.kind = ExprKind::variable;
  n.name = std::move(name);
  return raw(std::move(n));
}

Expr Expr::sqrt(const Expr& argument) {
  if (argument.is_constant()) {
    const Rational& c = argument.value();
    if (c.sign() < 0) fail(errc::negative_radicand, "sqrt of negative constant");
    if (mpz_perfect_square_p(c.num().get_mpz_t()) &&
        mpz_perfect_square_p(c.den().get_mpz_t())) {
      mpz_class rn, rd;
      mpz_sqrt(rn.get_mpz_t(), c.num().get_mpz_t());
      mpz_sqrt(rd.get_mpz_t(), c.den().get_mpz_t());
      return constant(Rational(rn, rd));
    }
  }
  Node n;
  n.kind = ExprKind::sqrt_;
  n.kids = {argument};
  return raw(std::move(n));
}

Expr Expr::pow(const Expr& base, long exponent) {
  if (exponent == 0) return constant(1);
  if (exponent == 1) return base;
  if (base.is_constant()) {
    if (base.value().is_zero() && exponent < 0)
      fail(errc::division_by_zero, "zero raised to negative power");
    return constant(base.value().pow(exponent));
  }
  switch (base.kind()) {
    case ExprKind::power:
      return pow(base.children()[0], base.exponent() * exponent);
    case ExprKind::product: {
      std::vector<Expr> out;
      out.reserve(base.children().size());
      for (const Expr& k : base.children()) out.push_back(pow(k, exponent));
      return mul(std::move(out));
    }
    case ExprKind::sqrt_: {
      const Expr& arg = base.children()[0];
      if (exponent % 2 == 0) return pow(arg, exponent / 2);
      return mul({pow(arg, (exponent - 1) / 2), sqrt(arg)});
    }
    default: {
      Node n;
      n.kind = ExprKind::power;
      n.kids = {base};
      n.exponent = exponent;
      return raw(std::move(n));
    }
  }
}

Expr Expr::add(std::vector<Expr> terms) {
  // Flatten nested sums and fold constants.
  Rational constant_part(0);
  std::vector<Expr> flat;
  std::vector<Expr> work(terms.rbegin(), terms.rend());
  while (!work.empty()) {
    Expr t = work.back();
    work.pop_back();
    if (t.kind() == ExprKind::sum) {
      for (auto it = t.children().rbegin(); it != t.children().rend(); ++it)
        work.push_back(*it);
    } else if (t.is_constant()) {
      constant_part += t.value();
    } else {
      flat.push_back(std::move(t));
    }
  }

  // Merge like terms by rational coefficient.
  std::map<Expr, Rational, ExprLess> by_core;
  for (const Expr& t : flat) {
    Rational coeff(1);
    Expr core = t;
    if (t.kind() == ExprKind::product && t.children()[0].is_constant()) {
      coeff = t.children()[0].value();
      const auto& ks = t.children();
      if (ks.size() == 2) {
        core = ks[1];
      } else {
        Node n;
        n.kind = ExprKind::product;
        n.kids.assign(ks.begin() + 1, ks.end());
        core = raw(std::move(n));
      }
    }
    by_core[core] += coeff;
  }

  std::vector<Expr> out;
  for (const auto& [core, coeff] : by_core) {
    if (coeff.is_zero()) continue;
    if (coeff.is_one())
      out.push_back(core);
    else
      out.push_back(mul({constant(coeff), core}));
  }
  if (!constant_part.is_zero()) out.push_back(constant(constant_part));
  if (out.empty()) return constant(constant_part);
  if (out.size() == 1) return out[0];
  std::sort(out.begin(), out.end(), ExprLess{});
  Node n;
  n.kind = ExprKind::sum;
  n.kids = std::move(out);
  return raw(std::move(n));
}

Expr Expr::mul(std::vector<Expr> factors) {
  Rational constant_part(1);
  std::vector<Expr> flat;
  std::vector<Expr> work(factors.rbegin(), factors.rend());
  while (!work.empty()) {
    Expr f = work.back();
    work.pop_back();
    if (f.kind() == ExprKind::product) {
      for (auto it = f.children().rbegin(); it != f.children().rend(); ++it)
        work.push_back(*it);
    } else if (f.is_constant()) {
      constant_part *= f.value();
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (constant_part.is_zero()) return constant(0);

  // Merge like bases by integer exponent; folding may release new constants
  // or products (e.g. sqrt(a)^2 -> a), so iterate until stable.
  for (int round = 0; round < 16; ++round) {
    std::map<Expr, long, ExprLess> by_base;
    for (const Expr& f : flat) {
      if (f.kind() == ExprKind::power)
        by_base[f.children()[0]] += f.exponent();
      else
        by_base[f] += 1;
    }
    std::vector<Expr> next;
    bool again = false;
    for (const auto& [base, e] : by_base) {
      if (e == 0) continue;
      Expr r = pow(base, e);
      if (r.is_constant()) {
        constant_part *= r.value();
        again = true;
      } else if (r.kind() == ExprKind::product) {
        for (const Expr& k : r.children()) {
          if (k.is_constant())
            constant_part *= k.value();
          else
            next.push_back(k);
        }
        again = true;
      } else {
        next.push_back(r);
      }
    }
    if (constant_part.is_zero()) return constant(0);
    flat = std::move(next);
    if (!again) break;
  }

  if (flat.empty()) return constant(constant_part);
  std::sort(flat.begin(), flat.end(), ExprLess{});

  // A rational constant distributes over one sum factor, so no canonical
  // product carries both a constant and a sum (keeps linear combinations
  // structurally comparable).
  if (!constant_part.is_one()) {
    auto it = std::find_if(flat.begin(), flat.end(),
                           [](const Expr& f) { return f.kind() == ExprKind::sum; });
    if (it != flat.end()) {
      std::vector<Expr> distributed;
      distributed.reserve(it->children().size());
      for (const Expr& term : it->children())
        distributed.push_back(mul({constant(constant_part), term}));
      *it = add(std::move(distributed));
      return mul(std::move(flat));
    }
  }

  if (!constant_part.is_one()) {
    flat.insert(flat.begin(), constant(constant_part));
  } else if (flat.size() == 1) {
    return flat[0];
  }
  Node n;
  n.kind = ExprKind::product;
  n.kids = std::move(flat);
  return raw(std::move(n));
}

std::size_t Expr::node_count() const {
  std::size_t total = 1;
  for (const Expr& k : children()) total += k.node_count();
  return total;
}

Expr differentiate(const Expr& e, const std::string& var) {
  switch (e.kind()) {
    case ExprKind::constant:
      return Expr::constant(0);
    case ExprKind::variable:
      return Expr::constant(e.name() == var ? 1 : 0);
    case ExprKind::sum: {
      std::vector<Expr> parts;
      for (const Expr& k : e.children()) parts.push_back(differentiate(k, var));
      return Expr::add(std::move(parts));
    }
    case ExprKind::product: {
      const auto& ks = e.children();
      std::vector<Expr> terms;
      for (size_t i = 0; i < ks.size(); ++i) {
        Expr di = differentiate(ks[i], var);
        if (di.is_zero()) continue;
        std::vector<Expr> fs;
        fs.push_back(std::move(di));
        for (size_t j = 0; j < ks.size(); ++j)
          if (j != i) fs.push_back(ks[j]);
        terms.push_back(Expr::mul(std::move(fs)));
      }
      return Expr::add(std::move(terms));
    }
    case ExprKind::power: {
      const Expr& base = e.children()[0];
      long n = e.exponent();
      return Expr::mul({Expr::constant(n), Expr::pow(base, n - 1), differentiate(base, var)});
    }
    case ExprKind::sqrt_: {
      const Expr& arg = e.children()[0];
      // d sqrt(a) = a' / (2 sqrt(a))
      return Expr::mul({Expr::constant(Rational(1, 2)), differentiate(arg, var),
                        Expr::pow(Expr::sqrt(arg), -1)});
    }
  }
  fail(errc::internal, "unhandled expression kind");
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
  return eval_in(e, bindings, ExprOps{});
}

double eval_numeric(const Expr& e, const std::map<std::string, double>& point) {
  return eval_in(e, point, DoubleOps{});
}

Rational eval_exact(const Expr& e, const std::map<std::string, Rational>& point) {
  return eval_in(e, point, RationalOps{});
}

namespace {

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.kind() == ExprKind::variable) {
    out.insert(e.name());
    return;
  }
  for (const Expr& k : e.children()) collect_vars(k, out);
}

}  // namespace

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

namespace {

using FactorList = std::map<Expr, long, ExprLess>;

FactorList factor_list(const Expr& e) {
  FactorList out;
  if (e.is_one()) return out;
  const std::vector<Expr> single{e};
  const std::vector<Expr>& kids = e.kind() == ExprKind::product ? e.children() : single;
  for (const Expr& f : kids) {
    if (f.kind() == ExprKind::power)
      out[f.children()[0]] += f.exponent();
    else
      out[f] += 1;
  }
  return out;
}

Expr from_factor_list(const FactorList& fl) {
  std::vector<Expr> fs;
  for (const auto& [base, e] : fl)
    if (e != 0) fs.push_back(Expr::pow(base, e));
  return Expr::mul(std::move(fs));
}

// Common denominator that shares structurally equal factors instead of
// multiplying blindly, so a/(u v) + b/v keeps denominator u v.
QuotientForm combine_sum(const QuotientForm& a, const QuotientForm& b) {
  if (a.denominator == b.denominator) return {a.numerator + b.numerator, a.denominator};
  if (b.denominator.is_one())
    return {a.numerator + b.numerator * a.denominator, a.denominator};
  if (a.denominator.is_one())
    return {b.numerator + a.numerator * b.denominator, b.denominator};

  FactorList fa = factor_list(a.denominator), fb = factor_list(b.denominator);
  FactorList common, ra = fa, rb = fb;
  for (const auto& [base, ea] : fa) {
    auto it = fb.find(base);
    if (it == fb.end()) continue;
    long shared = std::min(ea, it->second);
    if (shared <= 0) continue;
    common[base] = shared;
    ra[base] -= shared;
    rb[base] -= shared;
  }
  if (common.empty())
    return {a.numerator * b.denominator + b.numerator * a.denominator,
            a.denominator * b.denominator};
  Expr rest_a = from_factor_list(ra), rest_b = from_factor_list(rb);
  return {a.numerator * rest_b + b.numerator * rest_a,
          from_factor_list(common) * rest_a * rest_b};
}

}  // namespace

QuotientForm quotient_normal_form(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::variable:
      return {e, Expr::constant(1)};
    case ExprKind::sum: {
      QuotientForm acc{Expr::constant(0), Expr::constant(1)};
      for (const Expr& k : e.children()) acc = combine_sum(acc, quotient_normal_form(k));
      return acc;
    }
    case ExprKind::product: {
      QuotientForm acc{Expr::constant(1), Expr::constant(1)};
      for (const Expr& k : e.children()) {
        QuotientForm q = quotient_normal_form(k);
        acc.numerator = acc.numerator * q.numerator;
        acc.denominator = acc.denominator * q.denominator;
      }
      return acc;
    }
    case ExprKind::power: {
      QuotientForm q = quotient_normal_form(e.children()[0]);
      long n = e.exponent();
      if (n > 0) return {Expr::pow(q.numerator, n), Expr::pow(q.denominator, n)};
      return {Expr::pow(q.denominator, -n), Expr::pow(q.numerator, -n)};
    }
    case ExprKind::sqrt_: {
      QuotientForm q = quotient_normal_form(e.children()[0]);
      if (q.denominator.is_one()) return {Expr::sqrt(q.numerator), Expr::constant(1)};
      // sqrt(a/b) = sqrt(a*b)/b
      return {Expr::sqrt(q.numerator * q.denominator), q.denominator};
    }
  }
  fail(errc::internal, "unhandled expression kind");
}

namespace {

// precedence levels: 1 sum, 2 product, 3 power operand
std::string print_expr(const Expr& e, int prec);

bool negative_leading(const Expr& e) {
  if (e.is_constant()) return e.value().sign() < 0;
  return e.kind() == ExprKind::product && e.children()[0].is_constant() &&
         e.children()[0].value().sign() < 0;
}

std::string print_expr(const Expr& e, int prec) {
  std::ostringstream os;
  switch (e.kind()) {
    case ExprKind::constant: {
      bool paren = prec >= 2 && e.value().sign() < 0;
      if (paren) os << "(";
      os << e.value();
      if (paren) os << ")";
      break;
    }
    case ExprKind::variable:
      os << e.name();
      break;
    case ExprKind::sum: {
      bool paren = prec >= 2;
      if (paren) os << "(";
      bool first = true;
      // canonical order keeps constants first; print them last
      for (auto it = e.children().rbegin(); it != e.children().rend(); ++it) {
        const Expr& k = *it;
        if (!first && negative_leading(k)) {
          os << " - " << print_expr(-k, 2);
        } else {
          if (!first) os << " + ";
          os << print_expr(k, first ? 1 : 2);
        }
        first = false;
      }
      if (paren) os << ")";
      break;
    }
    case ExprKind::product: {
      const auto& ks = e.children();
      size_t start = 0;
      if (ks[0].is_constant() && ks[0].value() == Rational(-1) && ks.size() > 1) {
        os << "-";
        start = 1;
      }
      bool first = true;
      for (size_t i = start; i < ks.size(); ++i) {
        if (!first) os << "*";
        os << print_expr(ks[i], 3);
        first = false;
      }
      break;
    }
    case ExprKind::power:
      os << print_expr(e.children()[0], 3) << "^" << e.exponent();
      break;
    case ExprKind::sqrt_:
      os << "sqrt(" << print_expr(e.children()[0], 1) << ")";
      break;
  }
  return os.str();
}

}  // namespace

std::string Expr::to_string() const { return print_expr(*this, 1); }

}  // namespace canard
