#pragma once

#include <string>
#include <vector>

#include "canard/expr.hpp"

namespace canard {

/// Parses the expression grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := atom ('^' signed-integer)?
///   atom   := number | identifier | '(' expr ')' | 'sqrt' '(' expr ')'
/// Whitespace is insignificant, there is no implicit multiplication, and
/// decimal literals convert exactly (0.01 -> 1/100). Every identifier must
/// appear in `variables`; errors carry the offending position.
Expr parse_expression(const std::string& text, const std::vector<std::string>& variables);

}  // namespace canard
