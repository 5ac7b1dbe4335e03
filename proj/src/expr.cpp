#include "orbitinv/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <set>

#include "orbitinv/scalar_field.hpp"

namespace orbitinv {

namespace {

struct FunctionEntry {
  std::string_view name;
  Func func;
};

constexpr FunctionEntry kFunctions[] = {
    {"sin", Func::Sin}, {"cos", Func::Cos},   {"exp", Func::Exp},
    {"log", Func::Log}, {"sqrt", Func::Sqrt}, {"tanh", Func::Tanh},
};

}  // namespace

const char* function_name(Func f) {
  for (const auto& entry : kFunctions) {
    if (entry.func == f) return entry.name.data();
  }
  return "?";
}

ParseError::ParseError(std::size_t offset, const std::string& message)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

// ---------------------------------------------------------------------------
// Node construction and access

Expr::Expr() : Expr(constant(0.0)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::var(Variable v) {
  auto n = std::make_shared<Node>();
  n->op = v == Variable::X ? Op::VarX : Op::VarY;
  return Expr(std::move(n));
}

Expr Expr::parameter(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Parameter;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->op = Op::Negate;
  n->children.push_back(std::move(operand));
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  if (op != Op::Add && op != Op::Sub && op != Op::Mul && op != Op::Div && op != Op::Pow) {
    throw std::invalid_argument("Expr::binary: not a binary operator");
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr Expr::call(Func f, Expr arg) {
  auto n = std::make_shared<Node>();
  n->op = Op::Call;
  n->func = f;
  n->children.push_back(std::move(arg));
  return Expr(std::move(n));
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Func Expr::func() const { return node_->func; }
const Expr& Expr::child(std::size_t i) const { return node_->children.at(i); }
std::size_t Expr::arity() const { return node_->children.size(); }

bool Expr::depends_on_variables() const {
  if (op() == Op::VarX || op() == Op::VarY) return true;
  for (const auto& c : node_->children) {
    if (c.depends_on_variables()) return true;
  }
  return false;
}

std::vector<std::string> Expr::parameters() const {
  std::set<std::string> names;
  auto walk = [&](const Expr& e, auto&& self) -> void {
    if (e.op() == Op::Parameter) names.insert(e.name());
    for (std::size_t i = 0; i < e.arity(); ++i) self(e.child(i), self);
  };
  walk(*this, walk);
  return {names.begin(), names.end()};
}

std::size_t Expr::size() const {
  std::size_t n = 1;
  for (const auto& c : node_->children) n += c.size();
  return n;
}

bool same_structure(const Expr& a, const Expr& b) {
  if (a.op() != b.op() || a.arity() != b.arity()) return false;
  switch (a.op()) {
    case Op::Constant:
      if (a.value() != b.value()) return false;
      break;
    case Op::Parameter:
      if (a.name() != b.name()) return false;
      break;
    case Op::Call:
      if (a.func() != b.func()) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (!same_structure(a.child(i), b.child(i))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (true) {
      while (i < src_.size() && std::isspace(static_cast<unsigned char>(src_[i]))) ++i;
      if (i == src_.size()) {
        out.push_back({Tok::End, i, {}});
        return out;
      }
      const char c = src_[i];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        out.push_back(number(i));
        i += out.back().text.size();
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_')) {
          ++j;
        }
        out.push_back({Tok::Ident, i, src_.substr(i, j - i)});
        i = j;
        continue;
      }
      Tok kind;
      switch (c) {
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '*': kind = Tok::Star; break;
        case '/': kind = Tok::Slash; break;
        case '^': kind = Tok::Caret; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case ',': kind = Tok::Comma; break;
        default:
          throw ParseError(i, std::string("unexpected character '") + c + "'");
      }
      out.push_back({kind, i, src_.substr(i, 1)});
      ++i;
    }
  }

 private:
  Token number(std::size_t start) {
    std::size_t j = start;
    auto digits = [&] {
      std::size_t n = 0;
      while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j, ++n;
      return n;
    };
    std::size_t n = digits();
    if (j < src_.size() && src_[j] == '.') {
      ++j;
      n += digits();
    }
    if (n == 0) throw ParseError(start, "malformed number");
    if (j < src_.size() && (src_[j] == 'e' || src_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        j = k;
        digits();
      }
    }
    Token t{Tok::Number, start, src_.substr(start, j - start)};
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    if (ec != std::errc() || !std::isfinite(t.number)) {
      throw ParseError(start, "malformed number '" + std::string(t.text) + "'");
    }
    return t;
  }

  std::string_view src_;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(Lexer(src).run()) {}

  Expr run() {
    if (peek().kind == Tok::End) throw ParseError(0, "empty expression");
    Expr e = expr();
    if (peek().kind != Tok::End) {
      throw ParseError(peek().offset, "unexpected '" + std::string(peek().text) + "'");
    }
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      const Token& t = peek();
      throw ParseError(t.offset, std::string("expected ") + what +
                                     (t.kind == Tok::End ? " at end of input"
                                                         : ", found '" + std::string(t.text) + "'"));
    }
    ++pos_;
  }

  Expr expr() {
    Expr lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      Op op = take().kind == Tok::Plus ? Op::Add : Op::Sub;
      lhs = Expr::binary(op, lhs, term());
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = power();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      Op op = take().kind == Tok::Star ? Op::Mul : Op::Div;
      lhs = Expr::binary(op, lhs, power());
    }
    return lhs;
  }

  Expr power() {
    Expr base = unary();
    if (peek().kind == Tok::Caret) {
      take();
      return Expr::binary(Op::Pow, base, power());
    }
    return base;
  }

  Expr unary() {
    if (peek().kind == Tok::Minus) {
      take();
      return Expr::negate(unary());
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        take();
        return Expr::constant(t.number);
      case Tok::LParen: {
        take();
        Expr inner = expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident:
        return identifier();
      case Tok::End:
        throw ParseError(t.offset, "unexpected end of input");
      default:
        throw ParseError(t.offset, "unexpected '" + std::string(t.text) + "'");
    }
  }

  Expr identifier() {
    const Token& t = take();
    const bool is_call = peek().kind == Tok::LParen;
    const FunctionEntry* fn = nullptr;
    for (const auto& entry : kFunctions) {
      if (entry.name == t.text) fn = &entry;
    }
    if (is_call) {
      if (fn == nullptr) throw ParseError(t.offset, "unknown function '" + std::string(t.text) + "'");
      take();
      if (peek().kind == Tok::RParen) {
        throw ParseError(peek().offset, std::string(fn->name) + " expects 1 argument, got 0");
      }
      Expr arg = expr();
      if (peek().kind == Tok::Comma) {
        throw ParseError(peek().offset, std::string(fn->name) + " expects 1 argument");
      }
      expect(Tok::RParen, "')'");
      return Expr::call(fn->func, arg);
    }
    if (fn != nullptr) {
      throw ParseError(t.offset, "function '" + std::string(t.text) + "' needs an argument list");
    }
    if (t.text == "x") return Expr::var(Variable::X);
    if (t.text == "y") return Expr::var(Variable::Y);
    if (t.text == "pi") return Expr::constant(std::numbers::pi);
    return Expr::parameter(std::string(t.text));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

// Binding strength used to decide where parentheses are needed.
int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Pow:
      return 3;
    case Op::Negate:
      return 4;
    case Op::Constant:
      return std::signbit(e.value()) ? 4 : 5;
    default:
      return 5;
  }
}

void print(const Expr& e, std::string& out);

void print_at(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Constant: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e.value());
      // Shortest form that still round-trips.
      for (int digits = 1; digits < 17; ++digits) {
        char trial[32];
        std::snprintf(trial, sizeof trial, "%.*g", digits, e.value());
        if (std::strtod(trial, nullptr) == e.value()) {
          std::snprintf(buf, sizeof buf, "%s", trial);
          break;
        }
      }
      out += buf;
      return;
    }
    case Op::VarX:
      out += 'x';
      return;
    case Op::VarY:
      out += 'y';
      return;
    case Op::Parameter:
      out += e.name();
      return;
    case Op::Negate:
      out += '-';
      print_at(e.child(0), 4, out);
      return;
    case Op::Call:
      out += function_name(e.func());
      out += '(';
      print(e.child(0), out);
      out += ')';
      return;
    case Op::Pow:
      print_at(e.child(0), 4, out);
      out += '^';
      print_at(e.child(1), 3, out);
      return;
    default: {
      const int p = precedence(e);
      print_at(e.child(0), p, out);
      out += e.op() == Op::Add ? '+' : e.op() == Op::Sub ? '-' : e.op() == Op::Mul ? '*' : '/';
      print_at(e.child(1), p + 1, out);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

bool is_const(const Expr& e) { return e.op() == Op::Constant; }

// Folds only when the operation is defined and finite at these operands.
bool fold(const EvalResult& r, Expr& out) {
  if (!r.ok()) return false;
  out = Expr::constant(r.value);
  return true;
}

}  // namespace

Expr make_neg(Expr a) {
  if (is_const(a)) return Expr::constant(-a.value());
  if (a.op() == Op::Negate) return a.child(0);
  return Expr::negate(std::move(a));
}

Expr make_add(Expr a, Expr b) {
  Expr folded;
  if (is_const(a) && is_const(b) && fold(apply_binary(Op::Add, a.value(), b.value()), folded)) {
    return folded;
  }
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::binary(Op::Add, std::move(a), std::move(b));
}

Expr make_sub(Expr a, Expr b) {
  Expr folded;
  if (is_const(a) && is_const(b) && fold(apply_binary(Op::Sub, a.value(), b.value()), folded)) {
    return folded;
  }
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return make_neg(std::move(b));
  return Expr::binary(Op::Sub, std::move(a), std::move(b));
}

Expr make_mul(Expr a, Expr b) {
  Expr folded;
  if (is_const(a) && is_const(b) && fold(apply_binary(Op::Mul, a.value(), b.value()), folded)) {
    return folded;
  }
  if (is_const(b) && !is_const(a)) std::swap(a, b);
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (a.is_constant(-1.0)) return make_neg(std::move(b));
  // c1 * (c2 * u) -> (c1*c2) * u
  if (is_const(a) && b.op() == Op::Mul && is_const(b.child(0)) &&
      fold(apply_binary(Op::Mul, a.value(), b.child(0).value()), folded)) {
    return make_mul(folded, b.child(1));
  }
  return Expr::binary(Op::Mul, std::move(a), std::move(b));
}

Expr make_div(Expr a, Expr b) {
  Expr folded;
  if (is_const(a) && is_const(b) && fold(apply_binary(Op::Div, a.value(), b.value()), folded)) {
    return folded;
  }
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && is_const(b) && b.value() != 0.0) return Expr::constant(0.0);
  return Expr::binary(Op::Div, std::move(a), std::move(b));
}

Expr make_pow(Expr a, Expr b) {
  Expr folded;
  if (is_const(a) && is_const(b) && fold(apply_binary(Op::Pow, a.value(), b.value()), folded)) {
    return folded;
  }
  if (b.is_constant(1.0)) return a;
  if (b.is_constant(0.0)) return Expr::constant(1.0);  // 0^0 == 1
  if (a.is_constant(1.0)) return Expr::constant(1.0);
  return Expr::binary(Op::Pow, std::move(a), std::move(b));
}

Expr make_call(Func f, Expr a) {
  Expr folded;
  if (is_const(a) && fold(apply_function(f, a.value()), folded)) return folded;
  return Expr::call(f, std::move(a));
}

Expr simplify(const Expr& e) {
  switch (e.op()) {
    case Op::Negate:
      return make_neg(simplify(e.child(0)));
    case Op::Add:
      return make_add(simplify(e.child(0)), simplify(e.child(1)));
    case Op::Sub:
      return make_sub(simplify(e.child(0)), simplify(e.child(1)));
    case Op::Mul:
      return make_mul(simplify(e.child(0)), simplify(e.child(1)));
    case Op::Div:
      return make_div(simplify(e.child(0)), simplify(e.child(1)));
    case Op::Pow:
      return make_pow(simplify(e.child(0)), simplify(e.child(1)));
    case Op::Call:
      return make_call(e.func(), simplify(e.child(0)));
    default:
      return e;
  }
}

// ---------------------------------------------------------------------------
// Differentiation

Expr derivative(const Expr& e, Variable v) {
  switch (e.op()) {
    case Op::Constant:
    case Op::Parameter:
      return Expr::constant(0.0);
    case Op::VarX:
      return Expr::constant(v == Variable::X ? 1.0 : 0.0);
    case Op::VarY:
      return Expr::constant(v == Variable::Y ? 1.0 : 0.0);
    case Op::Negate:
      return make_neg(derivative(e.child(0), v));
    case Op::Add:
      return make_add(derivative(e.child(0), v), derivative(e.child(1), v));
    case Op::Sub:
      return make_sub(derivative(e.child(0), v), derivative(e.child(1), v));
    case Op::Mul: {
      const Expr& a = e.child(0);
      const Expr& b = e.child(1);
      return make_add(make_mul(derivative(a, v), b), make_mul(a, derivative(b, v)));
    }
    case Op::Div: {
      const Expr& a = e.child(0);
      const Expr& b = e.child(1);
      Expr da = derivative(a, v);
      Expr db = derivative(b, v);
      if (db.is_constant(0.0)) return make_div(da, b);
      // (a'b - ab') / b^2
      return make_div(make_sub(make_mul(da, b), make_mul(a, db)), make_pow(b, Expr::constant(2.0)));
    }
    case Op::Pow: {
      const Expr& base = e.child(0);
      const Expr& expo = e.child(1);
      Expr dbase = derivative(base, v);
      if (!expo.depends_on_variables()) {
        // c * u^(c-1) * u'
        return make_mul(make_mul(expo, make_pow(base, make_sub(expo, Expr::constant(1.0)))), dbase);
      }
      // u^w * (w' log u + w u'/u)
      Expr dexpo = derivative(expo, v);
      return make_mul(e, make_add(make_mul(dexpo, make_call(Func::Log, base)),
                                  make_div(make_mul(expo, dbase), base)));
    }
    case Op::Call: {
      const Expr& u = e.child(0);
      Expr du = derivative(u, v);
      if (du.is_constant(0.0)) return Expr::constant(0.0);
      switch (e.func()) {
        case Func::Sin:
          return make_mul(make_call(Func::Cos, u), du);
        case Func::Cos:
          return make_neg(make_mul(make_call(Func::Sin, u), du));
        case Func::Exp:
          return make_mul(e, du);
        case Func::Log:
          return make_div(du, u);
        case Func::Sqrt:
          return make_div(du, make_mul(Expr::constant(2.0), e));
        case Func::Tanh:
          return make_mul(make_sub(Expr::constant(1.0), make_pow(e, Expr::constant(2.0))), du);
      }
    }
  }
  throw std::logic_error("derivative: unhandled node");
}

Expr bind(const Expr& e, const ParameterMap& params) {
  switch (e.op()) {
    case Op::Parameter: {
      auto it = params.find(e.name());
      if (it == params.end()) throw std::invalid_argument("unbound parameter '" + e.name() + "'");
      return Expr::constant(it->second);
    }
    case Op::Negate:
      return Expr::negate(bind(e.child(0), params));
    case Op::Call:
      return Expr::call(e.func(), bind(e.child(0), params));
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return Expr::binary(e.op(), bind(e.child(0), params), bind(e.child(1), params));
    default:
      return e;
  }
}

}  // namespace orbitinv
