"""Planar motion under a potential U and a vortical stream function psi.

Forces are F = -grad U + (psi_y, -psi_x). The module integrates trajectories,
labels resonances, refines periodic orbits, evaluates the three vortical
invariants on them and splits sampled force fields into U and psi.
"""

from ._core import (
    ClosedCurve,
    DomainError,
    FrequencyEstimate,
    GridFormatError,
    GridGeometry,
    IntegrationError,
    IntegratorConfig,
    InvariantReport,
    OrbitNotFound,
    ParseError,
    PeriodicOrbit,
    PhaseState,
    PoissonNotConverged,
    ResonanceLabel,
    ScalarField,
    SignedIntegral,
    SystemSpec,
    Trajectory,
    area_integral,
    classify,
    compose,
    decompose,
    energy_balance,
    estimate_frequencies,
    integrate,
    integrate_power,
    laplacian,
    line_integral,
    refine_orbit,
    report,
    time_integral,
    winding_number,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
