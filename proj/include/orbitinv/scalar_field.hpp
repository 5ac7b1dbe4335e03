#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "orbitinv/expr.hpp"

namespace orbitinv {

enum class DomainError {
  None,
  DivisionByZero,
  LogNonPositive,
  SqrtNegative,
  ZeroToNegativePower,
  NegativeBaseFractionalPower,
  Overflow,
};

const char* describe(DomainError e);

/// Outcome of a pointwise evaluation. A domain error is a value, not an
/// exception; callers that cannot continue use value_or_throw().
struct EvalResult {
  double value = 0.0;
  DomainError error = DomainError::None;

  bool ok() const noexcept { return error == DomainError::None; }
  explicit operator bool() const noexcept { return ok(); }
  double value_or_throw() const;
};

class DomainErrorException : public std::runtime_error {
 public:
  explicit DomainErrorException(DomainError kind);
  DomainError kind() const noexcept { return kind_; }

 private:
  DomainError kind_;
};

/// A scalar function of (x, y) with all parameters bound. Immutable; safe to
/// evaluate concurrently.
class ScalarField {
 public:
  ScalarField();  // identically zero
  explicit ScalarField(Expr expr, ParameterMap params = {});

  static ScalarField parse(std::string_view text, ParameterMap params = {});

  /// Bound and simplified tree used for evaluation and differentiation.
  const Expr& expr() const { return bound_; }
  /// Tree as written, parameters intact.
  const Expr& source() const { return source_; }
  const ParameterMap& params() const { return params_; }

  EvalResult eval(double x, double y) const;
  double operator()(double x, double y) const { return eval(x, y).value_or_throw(); }

  ScalarField derivative(Variable v) const;
  bool is_zero() const { return bound_.is_constant(0.0); }

  std::string to_string() const;

 private:
  struct Instr {
    Op op;
    Func func;
    double value;
  };
  void compile();

  Expr source_;
  ParameterMap params_;
  Expr bound_;
  std::vector<Instr> program_;
  std::size_t stack_depth_ = 0;
};

std::pair<ScalarField, ScalarField> grad(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);

/// Applies an operator under the same domain rules as ScalarField::eval.
EvalResult apply_binary(Op op, double a, double b);
EvalResult apply_function(Func f, double a);

}  // namespace orbitinv
