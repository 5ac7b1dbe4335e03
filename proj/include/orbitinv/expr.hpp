#pragma once

// Expression trees for scalar fields f(x, y).
//
// Grammar (highest precedence first):
//   primary  := number | x | y | pi | name | fn '(' expr ')' | '(' expr ')'
//   unary    := '-' unary | primary
//   power    := unary ['^' power]            (right associative)
//   term     := power {('*' | '/') power}
//   expr     := term {('+' | '-') term}
//
// Unary minus binds tighter than '^', so "-x^2" reads as (-x)^2.
// Implicit multiplication ("2x") is a syntax error.

#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace orbitinv {

enum class Op { Constant, VarX, VarY, Parameter, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Sin, Cos, Exp, Log, Sqrt, Tanh };

enum class Variable { X, Y };

using ParameterMap = std::map<std::string, double, std::less<>>;

const char* function_name(Func f);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& message);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Immutable expression node handle. Copies share structure.
class Expr {
 public:
  struct Node;

  Expr();  // constant 0

  static Expr constant(double value);
  static Expr var(Variable v);
  static Expr parameter(std::string name);
  static Expr negate(Expr operand);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr call(Func f, Expr arg);

  Op op() const;
  double value() const;            // Constant only
  const std::string& name() const; // Parameter only
  Func func() const;               // Call only
  const Expr& child(std::size_t i) const;
  std::size_t arity() const;

  bool is_constant(double v) const { return op() == Op::Constant && value() == v; }
  bool depends_on_variables() const;

  /// Names of all parameters, sorted and unique.
  std::vector<std::string> parameters() const;

  /// Node count of the tree.
  std::size_t size() const;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  Op op = Op::Constant;
  double value = 0.0;
  std::string name;
  Func func = Func::Sin;
  std::vector<Expr> children;
};

Expr parse(std::string_view text);

/// Minimal-parenthesis rendering; parse(to_string(e)) evaluates identically.
std::string to_string(const Expr& e);

// Simplifying constructors: constant folding (when the result is finite and
// defined) plus 0/1 identities. Nothing beyond that.
Expr make_neg(Expr a);
Expr make_add(Expr a, Expr b);
Expr make_sub(Expr a, Expr b);
Expr make_mul(Expr a, Expr b);
Expr make_div(Expr a, Expr b);
Expr make_pow(Expr a, Expr b);
Expr make_call(Func f, Expr a);

Expr simplify(const Expr& e);

/// Symbolic partial derivative, simplified.
Expr derivative(const Expr& e, Variable v);

/// Replaces every parameter with its bound value. Throws std::invalid_argument
/// naming the first unbound parameter.
Expr bind(const Expr& e, const ParameterMap& params);

/// Structural equality (constants compared exactly).
bool same_structure(const Expr& a, const Expr& b);

}  // namespace orbitinv
