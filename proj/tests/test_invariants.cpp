#include <doctest.h>

#include <cmath>

#include "orbitinv/invariants.hpp"
#include "support.hpp"

using namespace orbitinv;
using testing::kPi;

namespace {

const ScalarField& rotating() {  // omega r^2 / 2 with omega = 0.5
  static const ScalarField f = ScalarField::parse("0.25*(x^2+y^2)");
  return f;
}

}  // namespace

TEST_CASE("time integral") {
  const SystemSpec resonant = SystemSpec::from_text("r", "(2*x^2+3*y^2)/2", "x*y");
  const PeriodicOrbit o = refine_orbit(resonant, {1, 0, 0, 2, 0}, 6.2, {}, 1e-9);
  const SignedIntegral i7 = time_integral(resonant, o);
  CHECK(i7.absolute > 1.0);
  CHECK(std::abs(i7.value) <= 1e-9 * i7.absolute);

  const SystemSpec harmonic = SystemSpec::from_text("h", "0.5*(x^2+y^2)", "0");
  const SignedIntegral zero = time_integral(harmonic, integrate(harmonic, {1, 0, 0, 1, 0}, 2 * kPi));
  CHECK(zero.value == 0.0);
  CHECK(zero.absolute == 0.0);
}

TEST_CASE("time integral of a truncated quasi-periodic segment") {
  const SystemSpec s = SystemSpec::from_text("q", "x^2+y^2", "x*y");
  const Trajectory t = integrate(s, {1, 0, 0, 1, 0}, 1.0);
  const double r3 = std::sqrt(3.0);
  const double x1 = std::cos(1.0), y1 = std::sin(r3) / r3;
  const double exact = 0.5 * ((y1 * y1 - x1 * x1) - (0.0 - 1.0));
  CHECK(std::abs(time_integral(s, t).value - exact) <= 1e-7);
  CHECK(std::abs(exact) > 0.1);
}

TEST_CASE("line integral") {
  const ClosedCurve c = testing::circle(256);
  CHECK(std::abs(line_integral(ScalarField::parse("x*y"), c).value) <= 1e-8);

  const ClosedCurve fine = testing::circle(4096);
  // The polygon encloses slightly less than the disk.
  const double polygon_area = fine.signed_area();
  CHECK(std::abs(line_integral(rotating(), fine).value - kPi) <= 1e-5);
  CHECK(std::abs(line_integral(rotating(), fine).value - polygon_area) <= 1e-12);
  CHECK(std::abs(line_integral(rotating(), fine.reversed()).value + polygon_area) <= 1e-12);

  const ClosedCurve exact_enough = testing::circle(1 << 15);
  CHECK(std::abs(line_integral(rotating(), exact_enough).value - kPi) <= 1e-6);
  CHECK(std::abs(line_integral(rotating(), testing::circle(1 << 15, 1.0, false)).value + kPi) <= 1e-6);
}

TEST_CASE("winding grid") {
  const ClosedCurve c = testing::circle(1024);
  const WindingGrid g(c, 64);
  CHECK(g.box().xmin == doctest::Approx(-1.1));
  CHECK(g.box().xmax == doctest::Approx(1.1));
  // Brute force against the direct crossing count.
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const auto w = winding_number(c, g.sample_point(i, j));
      REQUIRE(w.has_value());
      CHECK(*w == g.winding(i, j));
    }
  }
}

TEST_CASE("winding grid perturbs cell centres that land on the curve") {
  // Square whose edges run exactly through a row and column of centres.
  const ClosedCurve sq({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}});
  const WindingGrid g(sq, 33);
  CHECK(g.perturbed_cells() > 0);
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const Point2 c = g.center(i, j), s = g.sample_point(i, j);
      CHECK(s.x >= c.x);
      CHECK(s.y >= c.y);
      CHECK(winding_number(sq, s).value() == g.winding(i, j));
    }
  }
}

TEST_CASE("area integral") {
  const ClosedCurve eight(testing::lissajous_points(1024));
  CHECK(area_integral(ScalarField::parse("x*y"), eight, 64).value == 0.0);
  const ClosedCurve c = testing::circle(4096);
  const SignedIntegral i9 = area_integral(rotating(), c, 256);
  CHECK(std::abs(i9.value - kPi) <= 1e-3);
  CHECK(i9.absolute == doctest::Approx(i9.value));
  CHECK(area_integral(rotating(), c.reversed(), 256).value == -i9.value);
  CHECK_THROWS_AS(area_integral(rotating(), c, 16), std::invalid_argument);
}

TEST_CASE("area integral converges at first order overall") {
  // Boundary-cell counting makes the error oscillate between neighbouring
  // resolutions; the trend over several doublings is first order.
  const ClosedCurve c = testing::circle(1 << 14);
  auto err = [&](std::size_t res) { return std::abs(area_integral(rotating(), c, res).value - kPi); };
  CHECK(err(256) <= 1e-3);
  CHECK(err(256) / err(512) >= 1.8);
  CHECK(err(64) / err(2048) >= 32.0);
}

TEST_CASE("figure eight: lobes cancel") {
  const ClosedCurve eight(testing::lissajous_points(4096));
  const SignedIntegral i9 = area_integral(rotating(), eight, 256);
  const SignedIntegral i8 = line_integral(rotating(), eight);
  CHECK(std::abs(i9.value) <= 1e-3 * i9.absolute);
  CHECK(std::abs(i8.value - i9.value) <= 1e-3 * i9.absolute);
}

TEST_CASE("constant laplacian gives k times the winding-weighted area") {
  const ScalarField psi = ScalarField::parse("1.5*x^2 - 0.25*y^2 + x*y");  // lap = 2.5
  std::vector<Point2> v;
  for (int k = 0; k < 2000; ++k) {
    const double t = 2 * kPi * k / 2000.0;
    v.push_back({std::cos(t) + 0.3 * std::cos(2 * t), std::sin(t)});
  }
  const ClosedCurve c(v);
  REQUIRE_FALSE(c.self_intersecting());
  CHECK(std::abs(area_integral(psi, c, 512).value - 2.5 * c.signed_area()) <= 1e-3 * 2.5 * c.signed_area());
}

TEST_CASE("report verdicts") {
  const SystemSpec resonant = SystemSpec::from_text("r", "(2*x^2+3*y^2)/2", "x*y");
  const PeriodicOrbit o = refine_orbit(resonant, {1, 0, 0, 2, 0}, 6.2, {}, 1e-9);
  const InvariantReport r = report(resonant, o, 256, 1e-6);
  CHECK(r.holds);
  CHECK(std::abs(r.I7) <= 1e-7 * r.N7);
  CHECK(std::abs(r.I8) <= 1e-7 * r.N8);
  CHECK(std::abs(r.I9) <= 1e-12);
  CHECK(r.self_intersecting);
  CHECK(r.residual_78 <= 1e-9 * std::max({r.N7, r.N8, 1e-12}));

  const SystemSpec harmonic = SystemSpec::from_text("h", "0.5*(x^2+y^2)", "0");
  const InvariantReport h = report(harmonic, refine_orbit(harmonic, {1, 0, 0, 1, 0}, 6.3, {}, 1e-9), 64, 1e-6);
  CHECK(h.holds);
  CHECK(h.I7 == 0.0);
  CHECK(h.I8 == 0.0);
  CHECK(h.I9 == 0.0);

  // A circle that is not an orbit of the rotating field: the contour check fails.
  const SignedIntegral i8 = line_integral(rotating(), testing::circle(4096));
  CHECK(std::abs(i8.value) > 1e-6 * i8.absolute);
  CHECK(std::abs(i8.value - kPi) <= 1e-5);
}

TEST_CASE("pairwise sum is exact on integers and order-fixed") {
  std::vector<double> v(1000);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k);
  CHECK(pairwise_sum(v.data(), v.size()) == 499500.0);
  CHECK(pairwise_sum(v.data(), 0) == 0.0);
}
