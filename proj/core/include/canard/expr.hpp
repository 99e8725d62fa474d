#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "canard/rational.hpp"

namespace canard {

enum class ExprKind { constant, variable, sum, product, power, sqrt_ };

/// Immutable canonical expression tree over exact rationals.
///
/// Canonical form: n-ary sums/products are flattened and sorted under a fixed
/// total node order; constant subtrees fold to a single constant; like terms
/// merge by rational coefficient and like factors by integer exponent;
/// division appears only as a negative-exponent power. Structural equality of
/// two canonical trees implies mathematical equality on the common domain
/// (the converse is not claimed: (x+1)^2 and x^2+2*x+1 stay distinct).
class Expr {
 public:
  Expr() : Expr(constant(Rational(0))) {}

  static Expr constant(Rational value);
  static Expr constant(long value) { return constant(Rational(value)); }
  static Expr variable(std::string name);

  static Expr add(std::vector<Expr> terms);
  static Expr mul(std::vector<Expr> factors);
  static Expr pow(const Expr& base, long exponent);
  static Expr sqrt(const Expr& argument);

  ExprKind kind() const;
  const Rational& value() const;              // constant nodes
  const std::string& name() const;            // variable nodes
  const std::vector<Expr>& children() const;  // sum/product; power/sqrt hold one child
  long exponent() const;                      // power nodes

  bool is_constant() const { return kind() == ExprKind::constant; }
  bool is_zero() const { return is_constant() && value().is_zero(); }
  bool is_one() const { return is_constant() && value().is_one(); }

  std::size_t node_count() const;
  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b) {
    return add({a, mul({constant(-1), b})});
  }
  friend Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
  friend Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, -1)}); }
  Expr operator-() const { return mul({constant(-1), *this}); }

  friend int compare(const Expr& a, const Expr& b);
  friend bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
  friend bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr raw(Node node);
  std::shared_ptr<const Node> node_;
};

Expr differentiate(const Expr& e, const std::string& var);
Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

/// Evaluates at a point; throws PoleAtPoint / NegativeRadicand.
double eval_numeric(const Expr& e, const std::map<std::string, double>& point);

/// Exact evaluation; throws SqrtPresent when a sqrt node is reached.
Rational eval_exact(const Expr& e, const std::map<std::string, Rational>& point);

std::set<std::string> free_variables(const Expr& e);

/// Result of quotient normalization: e = numerator/denominator on the common
/// domain, with no negative power anywhere in either part. sqrt(a/b) is
/// rewritten sqrt(a*b)/b so denominators stay sqrt-free when the input's are.
struct QuotientForm {
  Expr numerator;
  Expr denominator;
};

QuotientForm quotient_normal_form(const Expr& e);

}  // namespace canard
