#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orbitinv/helmholtz.hpp"
#include "orbitinv/invariants.hpp"
#include "orbitinv/resonance.hpp"

namespace py = pybind11;
using namespace orbitinv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array grid_array(const GridGeometry& g, const std::vector<double>& v) {
  Array out({g.ny, g.nx});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> from_grid_array(const GridGeometry& g, const Array& a, const char* what) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != g.ny || static_cast<std::size_t>(a.shape(1)) != g.nx) {
    throw py::value_error(std::string(what) + ": expected shape (ny, nx)");
  }
  return {a.data(), a.data() + a.size()};
}

ClosedCurve curve_from(const Array& pts) {
  if (pts.ndim() != 2 || pts.shape(1) != 2) throw py::value_error("curve: expected an (n, 2) array");
  std::vector<Point2> v(static_cast<std::size_t>(pts.shape(0)));
  auto a = pts.unchecked<2>();
  for (py::ssize_t k = 0; k < pts.shape(0); ++k) v[static_cast<std::size_t>(k)] = {a(k, 0), a(k, 1)};
  return ClosedCurve(std::move(v));
}

Array curve_array(const ClosedCurve& c) {
  const auto& v = c.vertices();
  Array out({v.size(), std::size_t{2}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < v.size(); ++k) {
    m(k, 0) = v[k].x;
    m(k, 1) = v[k].y;
  }
  return out;
}

// Rows (t, x, y, p, r).
Array states_array(const std::vector<PhaseState>& states) {
  Array out({states.size(), std::size_t{5}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const PhaseState& s = states[k];
    m(k, 0) = s.t;
    m(k, 1) = s.x;
    m(k, 2) = s.y;
    m(k, 3) = s.p;
    m(k, 4) = s.r;
  }
  return out;
}

Variable variable_from(const std::string& name) {
  if (name == "x") return Variable::X;
  if (name == "y") return Variable::Y;
  throw py::value_error("variable must be 'x' or 'y'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Planar motion under potential and vortical forces";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainErrorException>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);
  py::register_exception<OrbitNotFound>(m, "OrbitNotFound", PyExc_RuntimeError);
  py::register_exception<PoissonNotConverged>(m, "PoissonNotConverged", PyExc_RuntimeError);
  py::register_exception<GridFormatError>(m, "GridFormatError", PyExc_ValueError);

  py::class_<ScalarField>(m, "ScalarField")
      .def(py::init(&ScalarField::parse), py::arg("text"), py::arg("params") = ParameterMap{})
      .def("__call__", &ScalarField::operator(), py::arg("x"), py::arg("y"))
      .def("derivative", [](const ScalarField& f, const std::string& v) { return f.derivative(variable_from(v)); })
      .def("is_zero", &ScalarField::is_zero)
      .def("__str__", &ScalarField::to_string)
      .def("__repr__", [](const ScalarField& f) { return "ScalarField('" + f.to_string() + "')"; });
  m.def("laplacian", &laplacian);

  py::class_<PhaseState>(m, "PhaseState")
      .def(py::init([](double x, double y, double p, double r, double t) { return PhaseState{x, y, p, r, t}; }),
           py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("p") = 0.0, py::arg("r") = 0.0, py::arg("t") = 0.0)
      .def_readwrite("x", &PhaseState::x)
      .def_readwrite("y", &PhaseState::y)
      .def_readwrite("p", &PhaseState::p)
      .def_readwrite("r", &PhaseState::r)
      .def_readwrite("t", &PhaseState::t)
      .def("__repr__", [](const PhaseState& s) {
        return "PhaseState(x=" + std::to_string(s.x) + ", y=" + std::to_string(s.y) + ", p=" + std::to_string(s.p) +
               ", r=" + std::to_string(s.r) + ", t=" + std::to_string(s.t) + ")";
      });

  py::class_<SystemSpec>(m, "SystemSpec")
      .def(py::init([](const std::string& U, const std::string& psi, const ParameterMap& params,
                       const std::string& name) { return SystemSpec::from_text(name, U, psi, params); }),
           py::arg("potential"), py::arg("stream") = "0", py::arg("params") = ParameterMap{},
           py::arg("name") = "system")
      .def_property_readonly("name", &SystemSpec::name)
      .def_property_readonly("potential", &SystemSpec::potential)
      .def_property_readonly("stream", &SystemSpec::stream)
      .def("force", [](const SystemSpec& s, double x, double y) {
        const Force f = force(s, x, y);
        return py::make_tuple(f.fx, f.fy);
      })
      .def("energy", [](const SystemSpec& s, const PhaseState& st) { return energy(s, st); })
      .def("power", [](const SystemSpec& s, const PhaseState& st) { return power(s, st); });

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init([](double rtol, double atol, double initial_step, double max_step, std::size_t max_steps) {
             IntegratorConfig c{rtol, atol, initial_step, max_step, max_steps};
             c.validate();
             return c;
           }),
           py::arg("rtol") = 1e-10, py::arg("atol") = 1e-12, py::arg("initial_step") = 0.0,
           py::arg("max_step") = std::numeric_limits<double>::infinity(), py::arg("max_steps") = 1'000'000)
      .def_readwrite("rtol", &IntegratorConfig::rtol)
      .def_readwrite("atol", &IntegratorConfig::atol)
      .def_readwrite("initial_step", &IntegratorConfig::initial_step)
      .def_readwrite("max_step", &IntegratorConfig::max_step)
      .def_readwrite("max_steps", &IntegratorConfig::max_steps);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("t_begin", &Trajectory::t_begin)
      .def_property_readonly("t_end", &Trajectory::t_end)
      .def_property_readonly("steps", [](const Trajectory& t) { return t.steps().size(); })
      .def("front", &Trajectory::front)
      .def("back", &Trajectory::back)
      .def("at", &Trajectory::at, py::arg("t"))
      .def("sample", [](const Trajectory& t, std::size_t n) { return states_array(t.sample(n)); }, py::arg("n"),
           "Array of n + 1 uniformly spaced rows (t, x, y, p, r).");

  m.def("integrate", &integrate, py::arg("spec"), py::arg("start"), py::arg("t_end"),
        py::arg("config") = IntegratorConfig{}, py::call_guard<py::gil_scoped_release>());
  m.def("energy_balance", &energy_balance, py::arg("spec"), py::arg("trajectory"));
  m.def(
      "integrate_power",
      [](const SystemSpec& s, const Trajectory& t) {
        const PowerIntegral w = integrate_power(s, t);
        return py::make_tuple(w.work, w.absolute);
      },
      py::arg("spec"), py::arg("trajectory"), "Returns (work, integral of |power|).");

  py::class_<FrequencyEstimate>(m, "FrequencyEstimate")
      .def(py::init([](double f1, double f2, double c1, double c2) { return FrequencyEstimate{f1, f2, c1, c2}; }),
           py::arg("f1"), py::arg("f2"), py::arg("confidence1") = 1.0, py::arg("confidence2") = 1.0)
      .def_readonly("f1", &FrequencyEstimate::f1)
      .def_readonly("f2", &FrequencyEstimate::f2)
      .def_readonly("confidence1", &FrequencyEstimate::confidence1)
      .def_readonly("confidence2", &FrequencyEstimate::confidence2);
  m.def("estimate_frequencies", &estimate_frequencies, py::arg("trajectory"), py::arg("samples") = 4096);

  py::class_<ResonanceLabel>(m, "ResonanceLabel")
      .def_property_readonly("periodic", &ResonanceLabel::periodic)
      .def_readonly("m", &ResonanceLabel::m)
      .def_readonly("n", &ResonanceLabel::n)
      .def_readonly("period", &ResonanceLabel::period)
      .def("__repr__", [](const ResonanceLabel& l) {
        return l.periodic() ? "ResonanceLabel(periodic, m=" + std::to_string(l.m) + ", n=" + std::to_string(l.n) +
                                  ", period=" + std::to_string(l.period) + ")"
                            : std::string("ResonanceLabel(quasi-periodic)");
      });
  m.def("classify", &classify, py::arg("frequencies"), py::arg("max_den") = 10, py::arg("tol") = 1e-4);

  py::class_<ClosedCurve>(m, "ClosedCurve")
      .def(py::init(&curve_from), py::arg("points"))
      .def_property_readonly("vertices", &curve_array)
      .def("signed_area", &ClosedCurve::signed_area)
      .def("orientation", &ClosedCurve::orientation)
      .def("self_intersecting", &ClosedCurve::self_intersecting)
      .def("reversed", &ClosedCurve::reversed);
  m.def("winding_number", [](const ClosedCurve& c, double x, double y) { return winding_number(c, {x, y}); });

  py::class_<PeriodicOrbit>(m, "PeriodicOrbit")
      .def_readonly("initial", &PeriodicOrbit::initial)
      .def_readonly("period", &PeriodicOrbit::period)
      .def_readonly("closure", &PeriodicOrbit::closure)
      .def_readonly("one_period", &PeriodicOrbit::one_period)
      .def_readonly("curve", &PeriodicOrbit::curve)
      .def_readonly("self_intersecting", &PeriodicOrbit::self_intersecting)
      .def_readonly("iterations", &PeriodicOrbit::iterations);
  m.def(
      "refine_orbit",
      [](const SystemSpec& spec, const PhaseState& seed, double seed_period, const IntegratorConfig& cfg,
         double orbit_tol) { return refine_orbit(spec, seed, seed_period, cfg, orbit_tol); },
      py::arg("spec"), py::arg("seed"), py::arg("seed_period"), py::arg("config") = IntegratorConfig{},
      py::arg("orbit_tol") = 1e-9, py::call_guard<py::gil_scoped_release>());

  py::class_<SignedIntegral>(m, "SignedIntegral")
      .def_readonly("value", &SignedIntegral::value)
      .def_readonly("absolute", &SignedIntegral::absolute)
      .def("__repr__", [](const SignedIntegral& s) {
        return "SignedIntegral(value=" + std::to_string(s.value) + ", absolute=" + std::to_string(s.absolute) + ")";
      });
  m.def("time_integral", py::overload_cast<const SystemSpec&, const Trajectory&>(&time_integral));
  m.def("time_integral", py::overload_cast<const SystemSpec&, const PeriodicOrbit&>(&time_integral));
  m.def("line_integral", py::overload_cast<const ScalarField&, const ClosedCurve&>(&line_integral));
  m.def("line_integral", py::overload_cast<const SystemSpec&, const ClosedCurve&>(&line_integral));
  m.def("area_integral", py::overload_cast<const ScalarField&, const ClosedCurve&, std::size_t>(&area_integral),
        py::arg("stream"), py::arg("curve"), py::arg("resolution") = 256);
  m.def("area_integral", py::overload_cast<const SystemSpec&, const ClosedCurve&, std::size_t>(&area_integral),
        py::arg("spec"), py::arg("curve"), py::arg("resolution") = 256);

  py::class_<InvariantReport>(m, "InvariantReport")
      .def_readonly("I7", &InvariantReport::I7)
      .def_readonly("I8", &InvariantReport::I8)
      .def_readonly("I9", &InvariantReport::I9)
      .def_readonly("N7", &InvariantReport::N7)
      .def_readonly("N8", &InvariantReport::N8)
      .def_readonly("N9", &InvariantReport::N9)
      .def_readonly("holds", &InvariantReport::holds)
      .def_readonly("self_intersecting", &InvariantReport::self_intersecting)
      .def_readonly("period", &InvariantReport::period)
      .def_readonly("closure", &InvariantReport::closure);
  m.def("report", &report, py::arg("spec"), py::arg("orbit"), py::arg("resolution") = 256, py::arg("tol") = 1e-6);

  py::class_<GridGeometry>(m, "GridGeometry")
      .def_static("periodic_box", &GridGeometry::periodic_box, py::arg("nx"), py::arg("ny"), py::arg("xmin"),
                  py::arg("xmax"), py::arg("ymin"), py::arg("ymax"))
      .def_static("closed_box", &GridGeometry::closed_box, py::arg("nx"), py::arg("ny"), py::arg("xmin"),
                  py::arg("xmax"), py::arg("ymin"), py::arg("ymax"))
      .def_readonly("nx", &GridGeometry::nx)
      .def_readonly("ny", &GridGeometry::ny)
      .def_readonly("hx", &GridGeometry::hx)
      .def_readonly("hy", &GridGeometry::hy)
      .def_property_readonly("x", [](const GridGeometry& g) {
        Array out(static_cast<py::ssize_t>(g.nx));
        for (std::size_t i = 0; i < g.nx; ++i) out.mutable_data()[i] = g.x(i);
        return out;
      })
      .def_property_readonly("y", [](const GridGeometry& g) {
        Array out(static_cast<py::ssize_t>(g.ny));
        for (std::size_t j = 0; j < g.ny; ++j) out.mutable_data()[j] = g.y(j);
        return out;
      });

  m.def(
      "compose",
      [](const SystemSpec& spec, const GridGeometry& g) {
        const GridField f = compose(spec, g);
        return py::make_tuple(grid_array(g, f.fx), grid_array(g, f.fy));
      },
      py::arg("spec"), py::arg("geometry"), "Returns (Fx, Fy) with shape (ny, nx).");
  m.def(
      "decompose",
      [](const Array& fx, const Array& fy, const GridGeometry& g, const std::string& mode) {
        GridField f(g);
        f.fx = from_grid_array(g, fx, "fx");
        f.fy = from_grid_array(g, fy, "fy");
        DecompositionResult d;
        {
          py::gil_scoped_release release;
          d = decompose(f, boundary_mode_from_string(mode));
        }
        py::dict out;
        out["potential"] = grid_array(g, d.potential.values);
        out["stream"] = grid_array(g, d.stream.values);
        out["residual"] = d.residual;
        out["mode"] = to_string(d.mode);
        out["warnings"] = d.warnings;
        return out;
      },
      py::arg("fx"), py::arg("fy"), py::arg("geometry"), py::arg("mode") = "periodic");
}
