"""Numerical laboratory for the 3D coupled quadratic Schrodinger system:
pseudo-spectral evolution, conserved-quantity and symmetry checks, ground
states, negative-eigenvalue non-scattering criteria, and empirical
scattering-threshold scans."""

from .spectral import Field, Grid, NormSpec, make_grid
from .dynamics import DiagnosticSeries, Outcome, SolverConfig, State, evolve

__all__ = [
    "Field",
    "Grid",
    "NormSpec",
    "make_grid",
    "DiagnosticSeries",
    "Outcome",
    "SolverConfig",
    "State",
    "evolve",
]

__version__ = "0.1.0"
