"""Randomized zero-violation checks: the gravity principle and the thin-triangle angle bound."""
from __future__ import annotations

import logging
from typing import Dict, List, Optional

import numpy as np

from ..barycentric.barycenter import barycenter
from ..barycentric.measures import DiscreteMeasure
from ..config import ExperimentConfig, SolverSettings, config_hash
from ..errors import ConvergenceError, MeasureError
from ..geometry.domes import Dome, RoundBall, dome_distance
from ..geometry.hyperbolic import distance_array, exp_ray_array, gromov_angle_bound, law_of_cosines_angle, log_map_array
from ..geometry.points import BPoint, angle_between, normalize_rows
from ..workflows.parallel import map_ordered, trial_generators
from .report import ExperimentReport
from .sampling import cap_directions, uniform_directions

logger = logging.getLogger(__name__)

GRAVITY_MASS = 2.0 / 3.0
GRAVITY_RADII = (0.05, 1.0)
GRAVITY_NODES = (4, 48)
TRIANGLE_SIDES = (0.1, 6.0)
MIN_SIDE = 0.1
ANGLE_SLACK = 1e-9
CONSISTENCY_TOLERANCE = 1e-6


def _gravity_trial(rng: np.random.Generator, dim: int, settings: SolverSettings) -> Dict[str, object]:
    """Barycenter of a measure giving mass > 2/3 to a random cap, and its distance to the cap's dome."""
    ball = RoundBall(BPoint(uniform_directions(1, dim, rng)[0]), float(rng.uniform(*GRAVITY_RADII)))
    mass = float(rng.uniform(GRAVITY_MASS + 0.01, 0.99))
    inside = int(rng.integers(*GRAVITY_NODES))
    outside = int(rng.integers(1, GRAVITY_NODES[1]))
    nodes = np.vstack([cap_directions(ball.center.dir, ball.radius, inside, rng), uniform_directions(outside, dim, rng)])
    weights = np.concatenate([mass * rng.dirichlet(np.ones(inside)), (1.0 - mass) * rng.dirichlet(np.ones(outside))])
    row: Dict[str, object] = {"cap_radius": ball.radius, "cap_mass": mass, "nodes": inside + outside}
    try:
        result = barycenter(
            DiscreteMeasure.normalized(nodes, weights), settings.barycenter_tol, settings.barycenter_max_iter
        )
    except (MeasureError, ConvergenceError) as exc:
        row.update({"redrawn": 1, "reason": str(exc)})
        return row
    row.update({"redrawn": 0, "dome_distance": dome_distance(Dome(ball), result.point), "iterations": result.iterations})
    return row


def run_gravity(
    config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> ExperimentReport:
    """d(BCG(mu), Dome(B)) < 1 whenever mu(B) > 2/3, over ``config.trials`` random measures."""
    settings = settings or SolverSettings()
    report = ExperimentReport("gravity", config_hash(config))
    dim = config.n + 1
    rows = map_ordered(lambda rng: _gravity_trial(rng, dim, settings), trial_generators(config.seed, config.trials), workers)
    for index, row in enumerate(rows):
        row["trial"] = index
    report.tables["gravity"] = rows
    solved = [row for row in rows if not row["redrawn"]]
    redrawn = len(rows) - len(solved)
    if redrawn:
        logger.warning("gravity: %d measures were too concentrated and skipped", redrawn)
    violations = sum(1 for row in solved if row["dome_distance"] >= 1.0)
    worst = max((row["dome_distance"] for row in solved), default=float("nan"))
    report.scalars["max_dome_distance"] = worst
    report.scalars["violations"] = violations
    report.scalars["skipped"] = redrawn
    report.check(
        "gravity.zero_violations",
        "mass above 2/3 in B keeps the barycenter within distance 1 of Dome(B)",
        violations == 0 and len(solved) > 0,
        violations,
    )
    return report


def _triangles(rng: np.random.Generator, count: int, dim: int) -> Dict[str, np.ndarray]:
    """Random triangles with apex p1 and sides |p1 p2|, |p1 p3| drawn from TRIANGLE_SIDES."""
    apex = exp_ray_array(np.zeros(dim), uniform_directions(count, dim, rng), rng.uniform(0.0, 3.0, size=count))
    second = exp_ray_array(apex, uniform_directions(count, dim, rng), rng.uniform(*TRIANGLE_SIDES, size=count))
    third = exp_ray_array(apex, uniform_directions(count, dim, rng), rng.uniform(*TRIANGLE_SIDES, size=count))
    return {"apex": apex, "second": second, "third": third}


def run_trig(
    config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> ExperimentReport:
    """Apex angle <= 4 exp(-(b + c - a) / 4) on random triangles with sides >= 0.1."""
    report = ExperimentReport("trig", config_hash(config))
    dim = config.n + 1
    (rng,) = trial_generators(config.seed, 1)
    kept: Dict[str, List[np.ndarray]] = {"apex": [], "second": [], "third": []}
    redrawn = 0
    remaining = config.trials
    while remaining > 0:
        batch = _triangles(rng, remaining, dim)
        opposite = distance_array(batch["second"], batch["third"])
        keep = opposite >= MIN_SIDE
        redrawn += int(np.count_nonzero(~keep))
        for key in kept:
            kept[key].append(batch[key][keep])
        remaining -= int(np.count_nonzero(keep))
    apex, second, third = (np.vstack(kept[key]) for key in ("apex", "second", "third"))

    a = distance_array(second, third)
    b = distance_array(apex, third)
    c = distance_array(apex, second)
    formula = law_of_cosines_angle(a, b, c)
    measured = angle_between(normalize_rows(log_map_array(apex, second)), normalize_rows(log_map_array(apex, third)))
    bound = gromov_angle_bound(a, b, c)
    violations = int(np.count_nonzero(measured > bound + ANGLE_SLACK))
    disagreement = float(np.max(np.abs(measured - formula)))
    report.tables["trig"] = [
        {"trial": index, "a": a[index], "b": b[index], "c": c[index], "angle": measured[index], "bound": bound[index]}
        for index in range(len(a))
    ]
    report.scalars["violations"] = violations
    report.scalars["redrawn"] = redrawn
    report.scalars["max_angle_to_bound"] = float(np.max(measured / bound))
    logger.info("trig: %d triangles, %d violations, %d re-drawn", len(a), violations, redrawn)
    report.check("trig.zero_violations", "the apex angle never exceeds the thin-triangle bound", violations == 0, violations)
    report.check(
        "trig.law_of_cosines_consistent",
        "the law-of-cosines angle matches the angle between log vectors",
        disagreement <= CONSISTENCY_TOLERANCE,
        disagreement,
    )
    return report
