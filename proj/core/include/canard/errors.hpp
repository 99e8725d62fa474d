#pragma once

#include <stdexcept>
#include <string>

namespace canard {

enum class errc {
  syntax_error,
  unknown_identifier,
  pole_at_point,
  negative_radicand,
  sqrt_present,
  not_rational,
  division_by_zero,
  zero_leading_coefficient,
  inexact_deflation,
  not_affine,
  no_solution,
  indeterminate,
  nonlinear_unknown,
  no_cancellation,
  degree_too_high,
  branch_invalid,
  seed_depends_on_parameter,
  multiple_roots_ambiguous,
  expression_budget_exceeded,
  no_collision,
  step_floor_reached,
  non_finite_state,
  not_converged,
  same_class_at_endpoints,
  bad_model_file,
  internal,
};

const char* errc_name(errc c);

/// Error thrown by every operation in the library; carries a stable code so
/// callers (the CLI in particular) can map failures to exit classes.
class error : public std::runtime_error {
 public:
  error(errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw error(code, message);
}

}  // namespace canard
