import math

import numpy as np
import pytest

import orbitinv as oi


def test_scalar_field():
    f = oi.ScalarField("a*x^2 + y", {"a": 3.0})
    assert f(2.0, 1.0) == 13.0
    assert str(f.derivative("x")) == "6*x"
    with pytest.raises(oi.ParseError):
        oi.ScalarField("x + * y")
    with pytest.raises(oi.DomainError):
        oi.ScalarField("log(x)")(-1.0, 0.0)


def test_harmonic_period():
    spec = oi.SystemSpec("(x^2+y^2)/2")
    traj = oi.integrate(spec, oi.PhaseState(1, 0, 0, 1), 2 * math.pi)
    end = traj.back()
    assert abs(end.x - 1.0) < 1e-7
    assert abs(end.r - 1.0) < 1e-7
    rows = traj.sample(64)
    assert rows.shape == (65, 5)
    assert rows[-1, 0] == pytest.approx(2 * math.pi)


def test_resonant_orbit_and_invariants():
    spec = oi.SystemSpec("(2*x^2+3*y^2)/2", "x*y")
    start = oi.PhaseState(1, 0, 0, 1)
    label = oi.classify(oi.estimate_frequencies(oi.integrate(spec, start, 400.0)), 10, 1e-4)
    assert label.periodic
    assert (label.m, label.n) == (2, 1)
    assert abs(label.period - 2 * math.pi) < 1e-3

    orbit = oi.refine_orbit(spec, start, label.period)
    assert orbit.closure <= 1e-9
    rep = oi.report(spec, orbit)
    assert rep.holds
    assert abs(rep.I7) <= 1e-7 * rep.N7
    assert abs(rep.I9) <= 1e-12


def test_quasi_periodic_refusal():
    spec = oi.SystemSpec("x^2+y^2", "x*y")
    with pytest.raises(oi.OrbitNotFound):
        oi.refine_orbit(spec, oi.PhaseState(1, 0, 0, 1), 2 * math.pi)


def test_green_theorem_on_circle():
    t = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
    circle = oi.ClosedCurve(np.column_stack([np.cos(t), np.sin(t)]))
    psi = oi.ScalarField("0.25*(x^2+y^2)")
    assert abs(oi.line_integral(psi, circle).value - math.pi) < 1e-5
    assert abs(oi.area_integral(psi, circle, 256).value - math.pi) < 1e-3
    assert oi.winding_number(circle, 0.0, 0.0) == 1


def test_helmholtz_round_trip():
    g = oi.GridGeometry.periodic_box(64, 64, 0, 2 * math.pi, 0, 2 * math.pi)
    spec = oi.SystemSpec("sin(x)*sin(y)", "cos(x)+cos(y)")
    fx, fy = oi.compose(spec, g)
    assert fx.shape == (64, 64)
    d = oi.decompose(fx, fy, g, "periodic")
    assert d["residual"] <= 1e-6
    X, Y = np.meshgrid(g.x, g.y)
    U = np.sin(X) * np.sin(Y)
    assert np.allclose(d["potential"] - d["potential"].mean(), U - U.mean(), atol=1e-8)
    with pytest.raises(ValueError):
        oi.decompose(fx[:, :10], fy, g)
    with pytest.raises(ValueError):
        oi.decompose(fx, fy, g, "neumann")
