#include "canard/parse.hpp"

#include <cctype>
#include <set>

namespace canard {

namespace {

struct Parser {
  const std::string& text;
  std::set<std::string> vars;
  size_t pos = 0;

  [[noreturn]] void err(errc code, const std::string& msg) const {
    fail(code, msg + " at position " + std::to_string(pos));
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr acc = parse_term();
    while (true) {
      char c = peek();
      if (c == '+') {
        ++pos;
        acc = acc + parse_term();
      } else if (c == '-') {
        ++pos;
        acc = acc - parse_term();
      } else {
        return acc;
      }
    }
  }

  Expr parse_term() {
    Expr acc = parse_factor();
    while (true) {
      char c = peek();
      if (c == '*') {
        ++pos;
        acc = acc * parse_factor();
      } else if (c == '/') {
        ++pos;
        acc = acc / parse_factor();
      } else {
        return acc;
      }
    }
  }

  Expr parse_factor() {
    Expr atom = parse_atom();
    if (peek() == '^') {
      ++pos;
      long e = parse_signed_integer();
      return Expr::pow(atom, e);
    }
    return atom;
  }

  long parse_signed_integer() {
    skip_ws();
    size_t start = pos;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
    size_t digits = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == digits) err(errc::syntax_error, "expected integer exponent");
    return std::stol(text.substr(start, pos - start));
  }

  Expr parse_atom() {
    char c = peek();
    if (c == '(') {
      ++pos;
      Expr inner = parse_expr();
      if (!consume(')')) err(errc::syntax_error, "expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t id_pos = pos;
      std::string id = parse_identifier();
      if (id == "sqrt") {
        if (!consume('(')) err(errc::syntax_error, "expected '(' after sqrt");
        Expr inner = parse_expr();
        if (!consume(')')) err(errc::syntax_error, "expected ')'");
        return Expr::sqrt(inner);
      }
      if (!vars.count(id)) {
        pos = id_pos;
        err(errc::unknown_identifier, "unknown identifier '" + id + "'");
      }
      return Expr::variable(id);
    }
    err(errc::syntax_error, "expected number, identifier or '('");
  }

  std::string parse_identifier() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    return text.substr(start, pos - start);
  }

  Expr parse_number() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    if (pos == start) err(errc::syntax_error, "expected number");
    return Expr::constant(Rational::from_string(text.substr(start, pos - start)));
  }
};

}  // namespace

Expr parse_expression(const std::string& text, const std::vector<std::string>& variables) {
  Parser p{text, std::set<std::string>(variables.begin(), variables.end())};
  Expr result = p.parse_expr();
  if (p.peek() != '\0') p.err(errc::syntax_error, "unexpected trailing input");
  return result;
}

}  // namespace canard
