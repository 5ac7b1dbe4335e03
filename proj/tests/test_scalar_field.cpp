#include <doctest.h>

#include <cmath>
#include <thread>

#include "orbitinv/scalar_field.hpp"
#include "support.hpp"

using namespace orbitinv;

TEST_CASE("eval: direct substitution") {
  CHECK(ScalarField::parse("x^2+y^2")(3, 4) == 25.0);
  CHECK(ScalarField::parse("sin(x)")(0, 99) == 0.0);
  CHECK(ScalarField::parse("tanh(x) + sqrt(y) + exp(0) + log(1)")(0, 4) == 3.0);
  CHECK(ScalarField::parse("x^0.5")(9, 0) == 3.0);
}

TEST_CASE("eval: domain errors are values") {
  const ScalarField inv = ScalarField::parse("1/x");
  const EvalResult r = inv.eval(0, 0);
  CHECK_FALSE(r.ok());
  CHECK(r.error == DomainError::DivisionByZero);
  CHECK_THROWS_AS(inv(0, 0), DomainErrorException);

  CHECK(ScalarField::parse("log(x)").eval(0, 0).error == DomainError::LogNonPositive);
  CHECK(ScalarField::parse("log(x)").eval(-1, 0).error == DomainError::LogNonPositive);
  CHECK(ScalarField::parse("sqrt(x)").eval(-1, 0).error == DomainError::SqrtNegative);
  CHECK(ScalarField::parse("x^(-1)").eval(0, 0).error == DomainError::ZeroToNegativePower);
  CHECK(ScalarField::parse("x^0.5").eval(-4, 0).error == DomainError::NegativeBaseFractionalPower);
  CHECK(ScalarField::parse("exp(x)").eval(1000, 0).error == DomainError::Overflow);
  CHECK(ScalarField::parse("x^0")(0, 0) == 1.0);
  CHECK(ScalarField::parse("x^3")(-2, 0) == -8.0);
}

TEST_CASE("grad: spec examples") {
  {
    auto [fx, fy] = grad(ScalarField::parse("x*y"));
    CHECK(fx.to_string() == "y");
    CHECK(fy.to_string() == "x");
    CHECK(fx(2, 5) == 5.0);
    CHECK(fy(2, 5) == 2.0);
  }
  {
    auto [fx, fy] = grad(ScalarField::parse("0.5*(x^2+y^2)"));
    for (double x : {-1.5, 0.0, 2.0}) {
      CHECK(fx(x, 0.3) == doctest::Approx(x).epsilon(1e-15));
      CHECK(fy(0.3, x) == doctest::Approx(x).epsilon(1e-15));
    }
  }
  {
    auto [fx, fy] = grad(ScalarField::parse("exp(x)*sin(y)"));
    CHECK(fx.to_string() == "exp(x)*sin(y)");
    CHECK(fy.to_string() == "exp(x)*cos(y)");
  }
}

TEST_CASE("laplacian: spec examples") {
  const ScalarField l1 = laplacian(ScalarField::parse("x^2+y^2"));
  CHECK(l1.expr().is_constant(4.0));
  CHECK(laplacian(ScalarField::parse("x*y")).is_zero());
  const ScalarField l3 = laplacian(ScalarField::parse("exp(x)*sin(y)"));
  for (double x : {-1.0, 0.3, 1.2}) CHECK(std::abs(l3(x, 0.7)) <= 1e-14);
}

TEST_CASE("parameters bind into the compiled field") {
  const ScalarField f = ScalarField::parse("(a*x^2+b*y^2)/2", {{"a", 2.0}, {"b", 3.0}});
  CHECK(f(1, 2) == 7.0);
  CHECK(f.params().at("a") == 2.0);
  auto [fx, fy] = grad(f);
  CHECK(fx(1, 2) == 2.0);
  CHECK(fy(1, 2) == 6.0);
}

TEST_CASE("random fields: symbolic derivatives agree with central differences") {
  testing::ExpressionGenerator gen(2024);
  int compared = 0;
  for (int k = 0; k < 100; ++k) {
    const std::string text = gen.next(3);
    const ScalarField f = ScalarField::parse(text);
    const ScalarField fx = f.derivative(Variable::X);
    const ScalarField fy = f.derivative(Variable::Y);
    CAPTURE(text);
    for (int p = 0; p < 10; ++p) {
      const double x = gen.uniform(-1.0, 1.0), y = gen.uniform(-1.0, 1.0);
      const double h = 1e-5;
      auto fd = [&](double dx, double dy, double step) -> std::optional<double> {
        const EvalResult a = f.eval(x + dx * step, y + dy * step);
        const EvalResult b = f.eval(x - dx * step, y - dy * step);
        if (!a.ok() || !b.ok()) return std::nullopt;
        return (a.value - b.value) / (2.0 * step);
      };
      for (int axis = 0; axis < 2; ++axis) {
        const double dx = axis == 0, dy = axis == 1;
        const EvalResult sym = (axis == 0 ? fx : fy).eval(x, y);
        const auto d1 = fd(dx, dy, h);
        const auto d2 = fd(dx, dy, 2 * h);
        const EvalResult centre = f.eval(x, y);
        if (!sym.ok() || !d1 || !d2 || !centre.ok()) continue;
        // Guard against points near singularities: the difference quotient
        // itself must be stable under a change of step.
        const double scale = std::max({1.0, std::abs(sym.value), std::abs(centre.value)});
        if (std::abs(*d1 - *d2) > 1e-7 * scale) continue;
        ++compared;
        CHECK(std::abs(sym.value - *d1) <= 1e-6 * std::max(1.0, std::abs(sym.value)));
      }
    }
  }
  CHECK(compared > 1500);
}

TEST_CASE("random fields: laplacian equals summed second derivatives") {
  testing::ExpressionGenerator gen(99);
  for (int k = 0; k < 100; ++k) {
    const ScalarField f = ScalarField::parse(gen.next(3));
    const ScalarField lap = laplacian(f);
    const ScalarField fxx = f.derivative(Variable::X).derivative(Variable::X);
    const ScalarField fyy = f.derivative(Variable::Y).derivative(Variable::Y);
    for (int p = 0; p < 5; ++p) {
      const double x = gen.uniform(-1.0, 1.0), y = gen.uniform(-1.0, 1.0);
      const EvalResult a = lap.eval(x, y), b = fxx.eval(x, y), c = fyy.eval(x, y);
      if (!a.ok() || !b.ok() || !c.ok()) continue;
      CHECK(std::abs(a.value - (b.value + c.value)) <= 1e-9 * std::max(1.0, std::abs(a.value)));
    }
  }
}

TEST_CASE("fields evaluate concurrently") {
  const ScalarField f = ScalarField::parse("sin(x)*exp(y) + x^3");
  std::vector<double> results(8);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < results.size(); ++t) {
    pool.emplace_back([&, t] {
      double s = 0.0;
      for (int k = 0; k < 20000; ++k) s += f(0.001 * k, 0.5);
      results[t] = s;
    });
  }
  for (auto& th : pool) th.join();
  for (double r : results) CHECK(r == results[0]);
}
