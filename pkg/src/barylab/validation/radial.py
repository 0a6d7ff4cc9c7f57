"""Radial growth of the extension: quasi-isometric rays from o and dome-to-dome distances."""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..config import ExperimentConfig, SolverSettings, config_hash
from ..geometry.domes import RoundBall, dome_center
from ..geometry.hyperbolic import dist, exp_ray
from ..geometry.points import BPoint, HPoint, angle_between
from ..workflows.parallel import map_ordered, trial_generators
from .common import SAMPLE_ERRORS, describe_point, distance_from_origin, extension_for, normalized_map, point_at
from .report import ExperimentReport
from .sampling import antithetic_directions, cap_directions, uniform_directions

logger = logging.getLogger(__name__)

EPSILON_LADDER = (0.5, 0.2, 0.1, 0.05)
GROWTH_BALL_RADII = (0.3, 0.5)
GROWTH_SHRINK = 100.0
GROWTH_DEPTH = 1.0
ANCHOR_SHARE = 0.25


def largest_c0(distances: np.ndarray, radii: Sequence[float], grid: Sequence[float], epsilon: float) -> float:
    """Largest grid value c0 with a 1 - epsilon share of rows satisfying d >= c0 R - c0 at every R; 0 if none.

    ``distances`` has one column per radius.
    """
    radii = np.asarray(radii, dtype=float)
    best = 0.0
    for c0 in sorted(grid):
        share = float(np.mean(np.all(distances >= c0 * radii - c0, axis=1)))
        if share >= 1.0 - epsilon:
            best = c0
    return best


def run_radial_qi(
    config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> ExperimentReport:
    """d(F(o), F(exp_o(R v))) over antithetic directions v and every R in ``config.radii``."""
    report = ExperimentReport("radial-qi", config_hash(config))
    _, balanced, _ = normalized_map(config)
    extension = extension_for(balanced, config, settings)
    dim = config.n + 1
    (rng,) = trial_generators(config.seed, 1)
    directions = antithetic_directions(config.directions, dim, rng)
    center = extension(HPoint.origin(dim))

    def distances_along(direction: np.ndarray) -> List[float]:
        try:
            return [dist(center, extension(point_at(direction, radius))) for radius in config.radii]
        except SAMPLE_ERRORS as exc:
            logger.warning("radial sample along %s dropped: %s", describe_point(direction), exc)
            return [float("nan")] * len(config.radii)

    distances = np.array(map_ordered(distances_along, directions, workers))
    solved = np.all(np.isfinite(distances), axis=1)
    failures = int(np.count_nonzero(~solved))
    distances = distances[solved]

    rows: List[Dict[str, object]] = []
    for index, (direction, row_values) in enumerate(zip(directions[solved], distances)):
        row: Dict[str, object] = {"direction": index}
        row.update({f"v{axis}": float(value) for axis, value in enumerate(direction)})
        row.update({f"d_R{radius:g}": float(value) for radius, value in zip(config.radii, row_values)})
        rows.append(row)
    report.tables["radial_qi"] = rows
    radii = np.asarray(config.radii)
    report.tables["radial_qi_fractions"] = [
        {"c0": c0, "fraction": float(np.mean(np.all(distances >= c0 * radii - c0, axis=1)))} for c0 in config.c0_grid
    ]

    c0 = largest_c0(distances, config.radii, config.c0_grid, config.epsilon)
    report.scalars["c0"] = c0
    report.scalars["epsilon"] = config.epsilon
    ladder = sorted(set(EPSILON_LADDER) | {config.epsilon}, reverse=True)
    ladder_values = [largest_c0(distances, config.radii, config.c0_grid, eps) for eps in ladder]
    for eps, value in zip(ladder, ladder_values):
        report.scalars[f"c0_epsilon{eps:g}"] = value
    logger.info("radial-qi: c0=%.3g at epsilon=%.3g over %d directions", c0, config.epsilon, len(distances))

    report.check("radial_qi.positive_c0", f"some c0 > 0 holds on a {1 - config.epsilon:g} share of directions", c0 > 0, c0)
    report.check(
        "radial_qi.monotone_in_epsilon",
        "the reported c0 does not increase as epsilon decreases",
        all(later <= earlier for earlier, later in zip(ladder_values, ladder_values[1:])),
    )
    report.check("radial_qi.no_solver_failures", "every ray sample was solved", failures == 0, failures)
    return report


def run_dome_growth(
    config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> ExperimentReport:
    """Fit d(F(x1), F(x2)) >= C d(x1, x2) - c for x1 the wall center of Dome(B) and x2 in Dome(B / 100)."""
    report = ExperimentReport("dome-growth", config_hash(config))
    _, balanced, _ = normalized_map(config)
    extension = extension_for(balanced, config, settings)
    dim = config.n + 1

    def trial(rng: np.random.Generator) -> Optional[Dict[str, object]]:
        ball = RoundBall(BPoint(uniform_directions(1, dim, rng)[0]), float(rng.uniform(*GROWTH_BALL_RADII)))
        small = ball.scaled(1.0 / GROWTH_SHRINK)
        anchor = cap_directions(small.center.dir, ANCHOR_SHARE * small.radius, 1, rng)[0]
        x1 = dome_center(ball)
        # a cap about anchor inside B / 100 has its dome inside Dome(B / 100)
        offset = float(angle_between(anchor, small.center.dir))
        entry = dome_center(RoundBall(BPoint(anchor), small.radius - offset))
        x2 = exp_ray(entry, anchor, float(rng.uniform(0.0, GROWTH_DEPTH)))
        try:
            image_distance = dist(extension(x1), extension(x2))
        except SAMPLE_ERRORS as exc:
            logger.warning("dome-growth trial dropped: %s", exc)
            return None
        return {
            "ball_radius": ball.radius,
            "distance": dist(x1, x2),
            "image_distance": image_distance,
            "x2_depth": float(distance_from_origin(x2.coords)[0]),
        }

    results = map_ordered(trial, trial_generators(config.seed, config.points), workers)
    rows = [dict(row, trial=index) for index, row in enumerate(results) if row is not None]
    report.tables["dome_growth"] = rows
    failures = len(results) - len(rows)
    report.check("dome_growth.no_solver_failures", "every trial was solved", failures == 0, failures)
    if len(rows) < 2:
        report.check("dome_growth.positive_slope", "too few trials to fit a slope", False)
        return report
    domain = np.array([row["distance"] for row in rows])
    image = np.array([row["image_distance"] for row in rows])
    slope = float(np.polyfit(domain, image, 1)[0]) if np.ptp(domain) > 0 else float("nan")
    offset = float(np.max(slope * domain - image)) if np.isfinite(slope) else float("nan")
    report.scalars["C"] = slope
    report.scalars["c"] = offset
    report.scalars["min_distance"] = float(domain.min())
    logger.info("dome-growth: C=%.4g, c=%.4g over %d trials", slope, offset, len(rows))
    report.check("dome_growth.positive_slope", "the fitted C is positive", np.isfinite(slope) and slope > 0, slope)
    return report
