"""Discrete Dirichlet problems on hyperbolic balls and the diagnostics built on them."""

from .diagnostics import DiagnosticsRecord, proof_diagnostics
from .dirichlet import (
    DiscreteMap,
    FlowReport,
    balance_residuals,
    dirichlet_energy,
    dump_mesh_rows,
    interpolate,
    rho,
    solve_dirichlet,
    solve_harmonic,
)
from .mesh import EDGE_WEIGHTINGS, BallMesh, build_mesh

__all__ = [
    "BallMesh",
    "DiagnosticsRecord",
    "DiscreteMap",
    "EDGE_WEIGHTINGS",
    "FlowReport",
    "balance_residuals",
    "build_mesh",
    "dirichlet_energy",
    "dump_mesh_rows",
    "interpolate",
    "proof_diagnostics",
    "rho",
    "solve_dirichlet",
    "solve_harmonic",
]
