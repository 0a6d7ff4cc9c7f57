"""Normalization of the visual density and the cap masses it assigns.

The default exponent n makes every vol_x a probability measure. The exponent n - 1 is also
evaluated so each run records how far its cap masses drift from the exact vol_x values.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Optional

import numpy as np

from ..config import ExperimentConfig, SolverSettings, config_hash
from ..geometry.domes import RoundBall, visual_cap_mass
from ..geometry.hyperbolic import visual_density_array
from ..geometry.points import BPoint, angle_between
from ..geometry.quadrature import sphere_nodes
from .common import point_at
from .report import ExperimentReport

logger = logging.getLogger(__name__)

NORMALIZATION_NODES = {1: 2048, 2: 8192}
SAMPLE_DISTANCES = (0.25, 0.5)
CAP_RADIUS = np.pi / 2.0
NORMALIZATION_TOLERANCE = 1e-6
CAP_TOLERANCE = 2e-2
MISMATCH_THRESHOLD = 0.1


def run_density_check(
    config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> ExperimentReport:
    """Total mass of vol_x and the mass of the half-sphere facing x, for the configured and the n - 1 exponent."""
    report = ExperimentReport("density", config_hash(config))
    n = config.n
    printed = float(n - 1)
    nodes = sphere_nodes(n, NORMALIZATION_NODES[n])
    # polar axis: the Fibonacci heights are a midpoint rule for zonal integrands
    axis = np.zeros(n + 1)
    axis[-1] = 1.0
    ball = RoundBall(BPoint(axis), CAP_RADIUS)
    inside = angle_between(nodes, axis) <= CAP_RADIUS

    rows: List[Dict[str, object]] = []
    for distance in SAMPLE_DISTANCES:
        x = point_at(axis, distance)
        density = visual_density_array(x.coords, nodes, config.exponent)
        printed_density = visual_density_array(x.coords, nodes, printed)
        exact = visual_cap_mass(x, ball)
        rows.append(
            {
                "distance": distance,
                "exponent": config.exponent,
                "total_mass": float(density.mean()),
                "printed_total_mass": float(printed_density.mean()),
                "cap_mass_exact": exact,
                "cap_mass": float(np.mean(density * inside)),
                "printed_cap_mass": float(np.mean(printed_density * inside)),
            }
        )
    report.tables["density"] = rows

    normalization = max(abs(row["total_mass"] - 1.0) for row in rows)
    cap_error = max(abs(row["cap_mass"] - row["cap_mass_exact"]) for row in rows)
    gap = max(abs(row["printed_cap_mass"] - row["cap_mass_exact"]) for row in rows)
    report.scalars["normalization_error"] = normalization
    report.scalars["cap_mass_error"] = cap_error
    report.scalars["printed_cap_gap"] = gap
    report.scalars["printed_total_mass"] = rows[-1]["printed_total_mass"]
    logger.info("density n=%d: normalization error %.3e, exponent %g cap gap %.3f", n, normalization, printed, gap)
    if n == 1:
        report.note("exponent 0 gives the constant density; its cap masses are those of vol_o")

    report.check(
        "density.normalized",
        f"vol_x has total mass 1 within {NORMALIZATION_TOLERANCE:g}",
        normalization <= NORMALIZATION_TOLERANCE,
        normalization,
    )
    report.check(
        "density.cap_mass_matches",
        f"quadrature cap masses match the closed form within {CAP_TOLERANCE:g}",
        cap_error <= CAP_TOLERANCE,
        cap_error,
    )
    report.check(
        "density.printed_exponent_mismatch",
        f"exponent {printed:g} misweights some cap by at least {MISMATCH_THRESHOLD:g}",
        gap >= MISMATCH_THRESHOLD,
        gap,
    )
    return report
