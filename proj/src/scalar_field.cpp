#include "orbitinv/scalar_field.hpp"

#include <array>
#include <cmath>

namespace orbitinv {

const char* describe(DomainError e) {
  switch (e) {
    case DomainError::None: return "ok";
    case DomainError::DivisionByZero: return "division by zero";
    case DomainError::LogNonPositive: return "log of non-positive value";
    case DomainError::SqrtNegative: return "sqrt of negative value";
    case DomainError::ZeroToNegativePower: return "zero raised to a negative power";
    case DomainError::NegativeBaseFractionalPower: return "negative base with non-integer exponent";
    case DomainError::Overflow: return "non-finite result";
  }
  return "unknown domain error";
}

DomainErrorException::DomainErrorException(DomainError kind)
    : std::runtime_error(std::string("domain error: ") + describe(kind)), kind_(kind) {}

double EvalResult::value_or_throw() const {
  if (!ok()) throw DomainErrorException(error);
  return value;
}

namespace {

EvalResult finite(double v) {
  if (!std::isfinite(v)) return {0.0, DomainError::Overflow};
  return {v, DomainError::None};
}

EvalResult power(double base, double expo) {
  const bool integral = std::nearbyint(expo) == expo;
  if (base == 0.0) {
    if (expo < 0.0) return {0.0, DomainError::ZeroToNegativePower};
    if (expo == 0.0) return {1.0, DomainError::None};  // 0^0 is taken as 1
    return {0.0, DomainError::None};
  }
  if (base < 0.0 && !integral) return {0.0, DomainError::NegativeBaseFractionalPower};
  return finite(std::pow(base, expo));
}

}  // namespace

EvalResult apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return finite(a + b);
    case Op::Sub: return finite(a - b);
    case Op::Mul: return finite(a * b);
    case Op::Div:
      if (b == 0.0) return {0.0, DomainError::DivisionByZero};
      return finite(a / b);
    case Op::Pow: return power(a, b);
    default: throw std::invalid_argument("apply_binary: not a binary operator");
  }
}

EvalResult apply_function(Func f, double a) {
  switch (f) {
    case Func::Sin: return finite(std::sin(a));
    case Func::Cos: return finite(std::cos(a));
    case Func::Exp: return finite(std::exp(a));
    case Func::Log:
      if (a <= 0.0) return {0.0, DomainError::LogNonPositive};
      return finite(std::log(a));
    case Func::Sqrt:
      if (a < 0.0) return {0.0, DomainError::SqrtNegative};
      return finite(std::sqrt(a));
    case Func::Tanh: return finite(std::tanh(a));
  }
  return {0.0, DomainError::Overflow};
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField() : ScalarField(Expr::constant(0.0)) {}

ScalarField::ScalarField(Expr expr, ParameterMap params)
    : source_(std::move(expr)), params_(std::move(params)) {
  bound_ = simplify(bind(source_, params_));
  compile();
}

ScalarField ScalarField::parse(std::string_view text, ParameterMap params) {
  return ScalarField(orbitinv::parse(text), std::move(params));
}

// Postfix program over a value stack; the tree is parameter-free here.
void ScalarField::compile() {
  program_.clear();
  std::size_t depth = 0;
  auto emit = [&](const Expr& e, auto&& self) -> void {
    for (std::size_t i = 0; i < e.arity(); ++i) self(e.child(i), self);
    Instr ins{e.op(), e.op() == Op::Call ? e.func() : Func::Sin,
              e.op() == Op::Constant ? e.value() : 0.0};
    program_.push_back(ins);
    switch (e.op()) {
      case Op::Constant:
      case Op::VarX:
      case Op::VarY:
        ++depth;
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow:
        --depth;
        break;
      default:
        break;
    }
    stack_depth_ = std::max(stack_depth_, depth);
  };
  stack_depth_ = 0;
  emit(bound_, emit);
}

EvalResult ScalarField::eval(double x, double y) const {
  constexpr std::size_t kInline = 64;
  std::array<double, kInline> inline_stack;
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (stack_depth_ > kInline) {
    heap_stack.resize(stack_depth_);
    stack = heap_stack.data();
  }
  std::size_t top = 0;
  for (const Instr& ins : program_) {
    switch (ins.op) {
      case Op::Constant:
        stack[top++] = ins.value;
        break;
      case Op::VarX:
        stack[top++] = x;
        break;
      case Op::VarY:
        stack[top++] = y;
        break;
      case Op::Negate:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::Call: {
        EvalResult r = apply_function(ins.func, stack[top - 1]);
        if (!r.ok()) return r;
        stack[top - 1] = r.value;
        break;
      }
      case Op::Parameter:
        throw std::logic_error("ScalarField: unbound parameter in compiled program");
      default: {
        EvalResult r = apply_binary(ins.op, stack[top - 2], stack[top - 1]);
        if (!r.ok()) return r;
        --top;
        stack[top - 1] = r.value;
        break;
      }
    }
  }
  return finite(stack[0]);
}

ScalarField ScalarField::derivative(Variable v) const {
  return ScalarField(orbitinv::derivative(bound_, v));
}

std::string ScalarField::to_string() const { return orbitinv::to_string(bound_); }

std::pair<ScalarField, ScalarField> grad(const ScalarField& f) {
  return {f.derivative(Variable::X), f.derivative(Variable::Y)};
}

ScalarField laplacian(const ScalarField& f) {
  auto [fx, fy] = grad(f);
  return ScalarField(make_add(orbitinv::derivative(fx.expr(), Variable::X),
                              orbitinv::derivative(fy.expr(), Variable::Y)));
}

}  // namespace orbitinv
