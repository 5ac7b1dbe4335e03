#include <doctest.h>

#include <cmath>
#include <sstream>

#include "orbitinv/helmholtz.hpp"
#include "support.hpp"

using namespace orbitinv;
using testing::kPi;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num / den);
}

std::vector<double> demeaned(GridScalar s) {
  const double m = s.mean();
  for (double& v : s.values) v -= m;
  return s.values;
}

GridField field_from(const GridGeometry& g, double (*fx)(double, double), double (*fy)(double, double)) {
  GridField f(g);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      f.fx[g.index(i, j)] = fx(g.x(i), g.y(j));
      f.fy[g.index(i, j)] = fy(g.x(i), g.y(j));
    }
  }
  return f;
}

}  // namespace

TEST_CASE("geometry") {
  const GridGeometry p = GridGeometry::periodic_box(16, 8, 0, 2 * kPi, -1, 1);
  CHECK(p.hx == doctest::Approx(2 * kPi / 16));
  CHECK(p.y(0) == -1.0);
  const GridGeometry c = GridGeometry::closed_box(11, 11, -1, 1, -1, 1);
  CHECK(c.x(10) == doctest::Approx(1.0));
  CHECK_THROWS_AS(GridGeometry::periodic_box(4, 16, 0, 1, 0, 1), std::invalid_argument);
  CHECK(boundary_mode_from_string("periodic") == BoundaryMode::Periodic);
  CHECK(boundary_mode_from_string("dirichlet-zero") == BoundaryMode::DirichletZero);
  CHECK_THROWS_AS(boundary_mode_from_string("neumann"), std::invalid_argument);
}

TEST_CASE("divergence") {
  const GridGeometry g = GridGeometry::closed_box(21, 21, -1, 1, -1, 1);
  const GridScalar d = divergence(field_from(g, [](double x, double) { return x; }, [](double, double y) { return y; }),
                                  BoundaryMode::DirichletZero);
  for (double v : d.values) CHECK(std::abs(v - 2.0) <= 1e-10);

  const GridField vort = compose(ScalarField(), ScalarField::parse("x*y"), g);
  CHECK(max_abs(divergence(vort, BoundaryMode::DirichletZero).values) <= 1e-10);
  CHECK(max_abs(divergence(GridField(g), BoundaryMode::Periodic).values) == 0.0);
}

TEST_CASE("curl") {
  const GridGeometry g = GridGeometry::closed_box(21, 21, -1, 1, -1, 1);
  const GridScalar rot = curl_z(field_from(g, [](double, double y) { return -y; }, [](double x, double) { return x; }),
                                BoundaryMode::DirichletZero);
  for (double v : rot.values) CHECK(std::abs(v - 2.0) <= 1e-10);
  const GridField grad = compose(ScalarField::parse("0.5*(x^2+y^2)"), ScalarField(), g);
  CHECK(max_abs(curl_z(grad, BoundaryMode::DirichletZero).values) <= 1e-10);
  // curl of (psi_y, -psi_x) is -lap psi.
  const GridField swirl = compose(ScalarField(), ScalarField::parse("0.5*(x^2+y^2)"), g);
  for (double v : curl_z(swirl, BoundaryMode::DirichletZero).values) CHECK(std::abs(v + 2.0) <= 1e-10);
}

TEST_CASE("periodic Poisson") {
  const GridGeometry g = GridGeometry::periodic_box(128, 128, 0, 2 * kPi, 0, 2 * kPi);
  const GridScalar rhs = sample(ScalarField::parse("-2*sin(x)*sin(y)"), g);
  const PoissonSolution sol = solve_poisson(rhs, BoundaryMode::Periodic);
  const GridScalar exact = sample(ScalarField::parse("sin(x)*sin(y)"), g);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(sol.u.values[k] - exact.values[k]) <= 1e-6);

  CHECK(max_abs(solve_poisson(GridScalar(g), BoundaryMode::Periodic).u.values) == 0.0);

  GridScalar c(g);
  std::fill(c.values.begin(), c.values.end(), 2.5);
  const PoissonSolution cs = solve_poisson(c, BoundaryMode::Periodic);
  CHECK(cs.removed_mean == doctest::Approx(2.5));
  CHECK(max_abs(cs.u.values) <= 1e-14);
}

TEST_CASE("dirichlet Poisson by SOR") {
  const GridGeometry g = GridGeometry::closed_box(33, 33, 0, 1, 0, 1);
  const GridScalar rhs = sample(ScalarField::parse("-2*pi^2*sin(pi*x)*sin(pi*y)"), g);
  const PoissonSolution sol = solve_poisson(rhs, BoundaryMode::DirichletZero);
  CHECK(sol.residual <= 1e-10);
  CHECK(sol.sweeps > 0);
  const GridScalar exact = sample(ScalarField::parse("sin(pi*x)*sin(pi*y)"), g);
  // 5-point discretisation error at h = 1/32.
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(sol.u.values[k] - exact.values[k]) <= 1e-3);
  for (std::size_t i = 0; i < g.nx; ++i) {
    CHECK(sol.u.at(i, 0) == 0.0);
    CHECK(sol.u.at(i, g.ny - 1) == 0.0);
  }
  CHECK(max_abs(solve_poisson(GridScalar(g), BoundaryMode::DirichletZero).u.values) == 0.0);
}

TEST_CASE("decompose: periodic round trip") {
  const GridGeometry g = GridGeometry::periodic_box(128, 128, 0, 2 * kPi, 0, 2 * kPi);
  const ScalarField U = ScalarField::parse("sin(x)*sin(y)");
  const ScalarField psi = ScalarField::parse("cos(x)+cos(y)");
  const GridField F = compose(U, psi, g);
  const DecompositionResult d = decompose(F, BoundaryMode::Periodic);
  CHECK(d.residual <= 1e-6);
  CHECK(d.warnings.empty());
  CHECK(rel_l2(demeaned(d.potential), demeaned(sample(U, g))) <= 1e-6);
  CHECK(rel_l2(demeaned(d.stream), demeaned(sample(psi, g))) <= 1e-6);
  CHECK(std::abs(d.potential.mean()) <= 1e-12);
  CHECK(std::abs(d.stream.mean()) <= 1e-12);

  // Orthogonality witness.
  CHECK(max_abs(divergence(rotational_part(d.stream, BoundaryMode::Periodic), BoundaryMode::Periodic).values) <= 1e-8);
  CHECK(max_abs(curl_z(gradient_part(d.potential, BoundaryMode::Periodic), BoundaryMode::Periodic).values) <= 1e-8);
}

TEST_CASE("decompose: zero and constant fields") {
  const GridGeometry g = GridGeometry::periodic_box(16, 16, 0, 1, 0, 1);
  const DecompositionResult z = decompose(GridField(g), BoundaryMode::Periodic);
  CHECK(z.residual == 0.0);
  CHECK(max_abs(z.potential.values) == 0.0);
  CHECK(max_abs(z.stream.values) == 0.0);

  GridField c(g);
  std::fill(c.fx.begin(), c.fx.end(), 1.5);
  std::fill(c.fy.begin(), c.fy.end(), -0.5);
  const DecompositionResult dc = decompose(c, BoundaryMode::Periodic);
  CHECK(dc.residual == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dc.warnings.size() == 1);

  const GridGeometry cb = GridGeometry::closed_box(16, 16, 0, 1, 0, 1);
  const DecompositionResult dz = decompose(GridField(cb), BoundaryMode::DirichletZero);
  CHECK(dz.residual == 0.0);
}

TEST_CASE("decompose: dirichlet grid convergence") {
  const ScalarField U = ScalarField::parse("sin(pi*x)*sin(pi*y)");
  const ScalarField psi = ScalarField::parse("sin(2*pi*x)*sin(pi*y)");
  std::vector<double> residuals;
  for (std::size_t n : {33, 65, 129}) {
    const GridGeometry g = GridGeometry::closed_box(n, n, 0, 1, 0, 1);
    residuals.push_back(decompose(compose(U, psi, g), BoundaryMode::DirichletZero).residual);
  }
  CAPTURE(residuals[0]);
  CAPTURE(residuals[1]);
  CAPTURE(residuals[2]);
  CHECK(residuals[0] / residuals[1] >= 3.5);
  CHECK(residuals[1] / residuals[2] >= 3.5);
}

TEST_CASE("compose agrees with the force") {
  const SystemSpec spec = SystemSpec::from_text("r", "(2*x^2+3*y^2)/2", "x*y");
  const GridGeometry g = GridGeometry::closed_box(9, 9, -2, 2, -2, 2);
  const GridField F = compose(spec, g);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const Force f = force(spec, g.x(i), g.y(j));
      CHECK(F.fx[g.index(i, j)] == f.fx);
      CHECK(F.fy[g.index(i, j)] == f.fy);
    }
  }
  CHECK(F.fx[g.index(6, 8)] == -1.0);  // node (1, 2)
  CHECK(F.fy[g.index(6, 8)] == -8.0);

  const GridField lin = compose(ScalarField::parse("0.5*(x^2+y^2)"), ScalarField(), g);
  const GridField vort = compose(ScalarField(), ScalarField::parse("x*y"), g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(lin.fx[k] == -g.x(k % g.nx));
    CHECK(vort.fx[k] == g.x(k % g.nx));
    CHECK(vort.fy[k] == -g.y(k / g.nx));
  }
}

TEST_CASE("grid CSV round trip and malformed input") {
  const GridGeometry g = GridGeometry::periodic_box(8, 10, 0, 1, -1, 1);
  const GridField F = compose(ScalarField::parse("x*y^2"), ScalarField::parse("sin(x)"), g);
  for (bool header : {true, false}) {
    std::stringstream ss;
    write_grid_field_csv(ss, F, header);
    const GridField back = read_grid_field_csv(ss);
    CHECK(back.geom.nx == 8);
    CHECK(back.geom.ny == 10);
    CHECK(back.fx == F.fx);
    CHECK(back.fy == F.fy);
  }
  std::stringstream ragged("x,y,Fx,Fy\n0,0,1,1\n1,0,1\n");
  CHECK_THROWS_AS(read_grid_field_csv(ragged), GridFormatError);
  std::stringstream text("x,y,Fx,Fy\n0,0,1,abc\n");
  CHECK_THROWS_AS(read_grid_field_csv(text), GridFormatError);
  std::stringstream empty("x,y,Fx,Fy\n");
  CHECK_THROWS_AS(read_grid_field_csv(empty), GridFormatError);
  std::stringstream uneven;
  for (int j = 0; j < 8; ++j) {
    for (int i = 0; i < (j == 7 ? 7 : 8); ++i) uneven << i << ',' << j << ",0,0\n";
  }
  CHECK_THROWS_AS(read_grid_field_csv(uneven), GridFormatError);
}
