"""Sampled first and second derivative bounds of the extension over growing balls."""
from __future__ import annotations

import logging
from typing import Dict, List, Optional

import numpy as np

from ..config import ExperimentConfig, SolverSettings, config_hash
from ..geometry.points import HPoint
from ..workflows.parallel import map_ordered, trial_generators
from .common import SAMPLE_ERRORS, describe_point, extension_for, is_isometry_trace, normalized_map, point_at
from .report import ExperimentReport
from .sampling import antithetic_directions

logger = logging.getLogger(__name__)

LIPSCHITZ_RADII = (2.0, 4.0, 6.0)
PLATEAU_FACTOR = 1.05
ISOMETRY_TOLERANCE = 1e-3


def _shell_points(config: ExperimentConfig, rng: np.random.Generator, inner: float, outer: float) -> List[HPoint]:
    dim = config.n + 1
    directions = antithetic_directions(config.points, dim, rng)[: config.points]
    distances = rng.uniform(inner, outer, size=len(directions))
    distances[-1] = outer
    return [point_at(direction, distance) for direction, distance in zip(directions, distances)]


def run_lipschitz(
    config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> ExperimentReport:
    """sup ||DF_f|| and sup ||D^2 F_f|| over B(o, R) for R = 2, 4, 6, sampled shell by shell."""
    settings = settings or SolverSettings()
    report = ExperimentReport("lipschitz", config_hash(config))
    f, balanced, _ = normalized_map(config)
    extension = extension_for(balanced, config, settings, tol=settings.derivative_tol)

    def measure(x: HPoint) -> Dict[str, object]:
        row: Dict[str, object] = {"error": ""}
        try:
            row["jacobian_norm"] = extension.jacobian(x).hyperbolic_norm
            row["second_derivative_norm"] = extension.second_derivative_norm(x)
        except SAMPLE_ERRORS as exc:
            row["error"] = str(exc)
        return row

    rows: List[Dict[str, object]] = []
    sup_first = 0.0
    sup_second = 0.0
    inner = 0.0
    for radius, rng in zip(LIPSCHITZ_RADII, trial_generators(config.seed, len(LIPSCHITZ_RADII))):
        points = _shell_points(config, rng, inner, radius)
        for x, result in zip(points, map_ordered(measure, points, workers)):
            row = {"radius": radius, "distance": 2.0 * float(np.arctanh(x.norm))}
            row.update({f"x{axis}": float(value) for axis, value in enumerate(x.coords)})
            row.update(result)
            rows.append(row)
            if result["error"]:
                report.note(f"solver failure at {describe_point(x.coords)}: {result['error']}")
                continue
            sup_first = max(sup_first, float(result["jacobian_norm"]))
            sup_second = max(sup_second, float(result["second_derivative_norm"]))
        report.scalars[f"sup_jacobian_R{radius:g}"] = sup_first
        report.scalars[f"sup_second_derivative_R{radius:g}"] = sup_second
        logger.info("lipschitz R=%g: sup |DF|=%.6g, sup |D2F|=%.6g", radius, sup_first, sup_second)
        inner = radius
    report.tables["lipschitz"] = rows

    failures = sum(1 for row in rows if row["error"])
    report.check("lipschitz.no_solver_failures", "every sample point was solved", failures == 0, failures)
    inner_sup = report.scalars[f"sup_jacobian_R{LIPSCHITZ_RADII[-2]:g}"]
    outer_sup = report.scalars[f"sup_jacobian_R{LIPSCHITZ_RADII[-1]:g}"]
    ratio = outer_sup / inner_sup if inner_sup > 0 else float("inf")
    report.scalars["plateau_ratio"] = ratio
    report.check(
        "lipschitz.plateau",
        f"sup |DF| over radius {LIPSCHITZ_RADII[-1]:g} is within {PLATEAU_FACTOR:g}x the radius {LIPSCHITZ_RADII[-2]:g} value",
        ratio <= PLATEAU_FACTOR,
        ratio,
    )
    report.check("lipschitz.finite", "sampled derivative norms are finite", np.isfinite(sup_first) and np.isfinite(sup_second))
    if is_isometry_trace(f):
        report.check(
            "lipschitz.isometry_unit_derivative",
            "an isometry trace has sup |DF| = 1",
            abs(outer_sup - 1.0) <= ISOMETRY_TOLERANCE,
            outer_sup,
        )
        report.check(
            "lipschitz.isometry_flat",
            "an isometry trace has vanishing second derivative",
            sup_second <= ISOMETRY_TOLERANCE,
            sup_second,
        )
    return report
