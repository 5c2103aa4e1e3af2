"""entrolab: entropy functionals along nonlinear diffusion flows, verified numerically."""

from .analytic import BarenblattSpec, RadialGrid, gaussian_reference
from .diagnostics import DiagnosticsReport, run_checks
from .flow import FlowParams, ScalarField, Trajectory, cfl_dt, evolve, step
from .geometry import Geometry, HessianField

__all__ = [
    "BarenblattSpec",
    "DiagnosticsReport",
    "FlowParams",
    "Geometry",
    "HessianField",
    "RadialGrid",
    "ScalarField",
    "Trajectory",
    "cfl_dt",
    "evolve",
    "gaussian_reference",
    "run_checks",
    "step",
]

__version__ = "0.1.0"
