#include <doctest.h>

#include <cmath>
#include <sstream>

#include "orbitinv/dynamics.hpp"
#include "support.hpp"

using namespace orbitinv;
using testing::kPi;

namespace {

const SystemSpec& harmonic() {
  static const SystemSpec s = SystemSpec::from_text("harmonic", "0.5*(x^2+y^2)", "0");
  return s;
}

const SystemSpec& resonant() {
  static const SystemSpec s = SystemSpec::from_text("resonant", "(2*x^2+3*y^2)/2", "x*y");
  return s;
}

double max_diff(const StateVec& a, const StateVec& b) {
  double m = 0.0;
  for (int k = 0; k < 4; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST_CASE("force") {
  Force f = force(harmonic(), 1, 2);
  CHECK(f.fx == -1.0);
  CHECK(f.fy == -2.0);
  f = force(resonant(), 1, 2);
  CHECK(f.fx == -1.0);
  CHECK(f.fy == -8.0);
  const SystemSpec flat = SystemSpec::from_text("c", "0", "c", {{"c", 3.5}});
  f = force(flat, -4.0, 9.0);
  CHECK(f.fx == 0.0);
  CHECK(f.fy == 0.0);
  CHECK_THROWS_AS(force(SystemSpec::from_text("s", "1/x", "0"), 0.0, 1.0), DomainErrorException);
}

TEST_CASE("rhs") {
  CHECK(rhs(harmonic(), {1, 0, 0, 1, 0}) == StateVec{0, 1, -1, 0});
  CHECK(rhs(resonant(), {1, 2, 0, 0, 0}) == StateVec{0, 0, -1, -8});
  CHECK(rhs(resonant(), {1, 2, 3, 4, 0}) == StateVec{3, 4, -1, -8});
}

TEST_CASE("energy and power") {
  CHECK(energy(harmonic(), {1, 0, 0, 1, 0}) == 1.0);
  CHECK(energy(SystemSpec::from_text("free", "0", "0"), {9, 9, 3, 4, 0}) == 12.5);
  CHECK(energy(SystemSpec::from_text("saddle", "x*y", "0"), {2, 3, 0, 0, 0}) == 6.0);
  const SystemSpec vort = SystemSpec::from_text("v", "0", "x*y");
  CHECK(power(vort, {1, 2, 3, 4, 0}) == -5.0);
  CHECK(power(harmonic(), {0.3, -1, 5, 7, 0}) == 0.0);
  CHECK(power(vort, {0.3, -1, 0, 0, 0}) == 0.0);
}

TEST_CASE("integrate: harmonic quarter period") {
  const Trajectory t = integrate(harmonic(), {1, 0, 0, 0, 0}, kPi / 2);
  CHECK(max_diff(t.back().vec(), {0, 0, -1, 0}) <= 1e-8);
  CHECK(t.t_end() == kPi / 2);
}

TEST_CASE("integrate: resonant system matches its closed form") {
  const PhaseState s0{1, 0, 0, 2, 0};
  const Trajectory t = integrate(resonant(), s0, 2 * kPi);
  CHECK(max_diff(t.back().vec(), s0.vec()) <= 1e-7);
  const testing::DecoupledOscillator exact{1.0, 2.0, s0};
  for (const PhaseState& s : t.sample(97)) CHECK(max_diff(s.vec(), exact.at(s.t).vec()) <= 1e-8);
}

TEST_CASE("integrate: singular potential underflows") {
  // For x < 0 the force 1/x^2 pulls the particle into the pole.
  const SystemSpec s = SystemSpec::from_text("singular", "1/x", "0");
  try {
    integrate(s, {-1, 0, 0, 0, 0}, 10.0);
    FAIL("expected an integration error");
  } catch (const IntegrationError& e) {
    CHECK(e.kind() == IntegrationError::Kind::StepUnderflow);
    CHECK(e.time() > 0.0);
    CHECK(e.time() < 2.0);
  }
}

TEST_CASE("integrate: max steps") {
  IntegratorConfig cfg;
  cfg.max_steps = 10;
  CHECK_THROWS_AS(integrate(harmonic(), {1, 0, 0, 1, 0}, 100.0, cfg), IntegrationError);
}

TEST_CASE("integrator config validation") {
  IntegratorConfig cfg;
  cfg.rtol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.atol = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_steps = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(integrate(harmonic(), {1, 0, 0, 1, 0}, -1.0), std::invalid_argument);
}

TEST_CASE("dense output matches the stored step endpoints") {
  const Trajectory t = integrate(resonant(), {0.4, -0.2, 0.3, 1.1, 0}, 30.0);
  REQUIRE(t.steps().size() > 10);
  double prev = t.t_begin();
  for (const auto& step : t.steps()) {
    CHECK(step.t1 > step.t0);
    CHECK(step.t0 == prev);
    prev = step.t1;
    CHECK(max_diff(step.at(step.t0), step.y0) <= 1e-12);
    CHECK(max_diff(step.at(step.t1), step.y1) <= 1e-12);
  }
}

TEST_CASE("conservative limit: energy drift over 50 periods") {
  IntegratorConfig cfg;
  cfg.rtol = 1e-10;
  const Trajectory t = integrate(harmonic(), {1, 0, 0, 1, 0}, 100 * kPi, cfg);
  const double H0 = energy(harmonic(), t.front());
  CHECK(std::abs(energy(harmonic(), t.back()) - H0) <= 1e-8 * H0);
  CHECK(std::abs(energy_balance(harmonic(), t)) <= 100 * cfg.rtol * H0);
}

TEST_CASE("energy balance on the resonant system") {
  const Trajectory t = integrate(resonant(), {0.7, 0.1, -0.2, 0.9, 0}, 25.0);
  const PowerIntegral w = integrate_power(resonant(), t);
  CHECK(w.absolute > 0.1);
  // Exact: the power is d/dt[(x^2 - y^2)/2].
  const PhaseState a = t.front(), b = t.back();
  const double exact = 0.5 * ((b.x * b.x - b.y * b.y) - (a.x * a.x - a.y * a.y));
  CHECK(std::abs(w.work - exact) <= 1e-8 * w.absolute);
  CHECK(std::abs(energy_balance(resonant(), t)) <= 1e-7 * (std::abs(energy(resonant(), a)) + w.absolute));
}

TEST_CASE("energy balance of a zero-length trajectory") {
  const Trajectory t(PhaseState{1, 2, 3, 4, 0}, {}, {});
  CHECK(energy_balance(resonant(), t) == 0.0);
}

TEST_CASE("tighter tolerances shrink the closed-form error") {
  const PhaseState s0{1, 0, 0, 2, 0};
  const testing::DecoupledOscillator exact{1.0, 2.0, s0};
  auto error_at = [&](double rtol) {
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = rtol * 1e-2;
    const Trajectory t = integrate(resonant(), s0, 2 * kPi, cfg);
    return max_diff(t.back().vec(), exact.at(2 * kPi).vec());
  };
  const double coarse = error_at(1e-6);
  const double fine = error_at(1e-7);
  CAPTURE(coarse);
  CAPTURE(fine);
  CHECK(coarse / fine >= 4.0);
}

TEST_CASE("trajectory CSV") {
  const Trajectory t = integrate(harmonic(), {1, 0, 0, 1, 0}, 1.0);
  std::ostringstream os;
  write_trajectory_csv(os, harmonic(), t, 0.25);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,x,y,p,r,H,power");
  int rows = 0;
  std::string last;
  while (std::getline(is, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 5);
  CHECK(last.rfind("1,", 0) == 0);
}
