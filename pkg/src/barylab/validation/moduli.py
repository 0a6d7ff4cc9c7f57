"""Modulus checks on S^2: distance versus modulus of separating annuli, and images of round annuli."""
from __future__ import annotations

import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from ..config import ExperimentConfig, SolverSettings, config_hash
from ..errors import ConfigError, GeometryError, MapEvaluationError
from ..geometry.domes import (
    Dome,
    RoundAnnulus,
    RoundBall,
    annulus_log_ratio,
    conformal_annulus,
    dome_center,
    dome_signed_distance,
    mod_round_annulus,
    perpendicular_feet,
    sphere_measure_constant,
    visual_cap_mass,
)
from ..geometry.hyperbolic import dist, exp_ray
from ..geometry.points import BPoint, HPoint, angle_between, mobius_add, normalize_rows, tangent_frame
from ..maps.sphere_maps import SphereMap
from ..workflows.parallel import map_ordered, trial_generators
from .common import catalog_map, is_isometry_trace
from .report import ExperimentReport
from .sampling import cap_directions, uniform_directions

logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-8
MAX_REDRAWS = 50
CONSTRUCTION_SHRINK = 25.0
CONSTRUCTION_TRIM = 1.0
CONSTRUCTION_BALL_RADII = (0.05, 0.5)
CIRCLE_SAMPLES = 2048
IMAGE_BALL_RADIUS = 0.5
LOG_RATIO_RANGE = (0.5, 3.0)
CONFORMAL_TOLERANCE = 1e-2
VIEW_STEP = 0.1
MAX_VIEW_DISTANCE = 12.0


def _require_sphere(config: ExperimentConfig) -> None:
    if config.n != 2:
        raise ConfigError("n=2 required")


def _point_in_dome(ball: RoundBall, rng: np.random.Generator) -> Tuple[Optional[HPoint], int]:
    """A random point of the open half-space Dome(ball), with the number of rejected draws."""
    for attempt in range(MAX_REDRAWS):
        direction = cap_directions(ball.center.dir, ball.radius, 1, rng)[0]
        candidate = HPoint(np.tanh(rng.uniform(0.0, 6.0) / 2.0) * direction)
        if dome_signed_distance(Dome(ball), candidate) < 0.0:
            return candidate, attempt
    return None, MAX_REDRAWS


def _random_annulus(rng: np.random.Generator) -> RoundAnnulus:
    center = BPoint(uniform_directions(1, 3, rng)[0])
    inner = float(rng.uniform(0.1, 1.2))
    outer = float(rng.uniform(inner + 0.1, min(np.pi - 0.1, inner + 1.5)))
    return RoundAnnulus(center, inner, outer)


def _inequality_trial(rng: np.random.Generator) -> Dict[str, object]:
    """Mod(A) >= omega_1 / d(x, y) for x, y in the two components of the complement of Dome(A)."""
    annulus = _random_annulus(rng)
    modulus = mod_round_annulus(annulus)
    omega = sphere_measure_constant(2)
    x, redraws_x = _point_in_dome(annulus.inner_ball, rng)
    y, redraws_y = _point_in_dome(annulus.outer_complement, rng)
    row: Dict[str, object] = {
        "inner_radius": annulus.inner_radius,
        "outer_radius": annulus.outer_radius,
        "log_ratio": annulus_log_ratio(annulus),
        "modulus": modulus,
        "redraws": redraws_x + redraws_y,
    }
    if x is None or y is None:
        row["degenerate"] = 1
        return row
    distance = dist(x, y)
    row.update({"degenerate": 0, "distance": distance, "margin": modulus - omega / distance})

    near, far = perpendicular_feet(annulus)
    feet_distance = dist(near, far)
    row["feet_error"] = abs(modulus - omega / feet_distance)
    sideways = tangent_frame(annulus.center.dir)[0]
    row["pushed_margin"] = dist(exp_ray(near, sideways, 0.5), far) - feet_distance

    wall = dome_center(annulus.inner_ball)
    expected = abs(math.log(1.0 / math.tan(annulus.inner_radius / 2.0)))
    row["dome_center_error"] = abs(dist(HPoint.origin(3), wall) - expected)
    return row


def _construction_trial(rng: np.random.Generator, on_axis: bool) -> Dict[str, object]:
    """Round annulus inside B separating x1 = wall center of Dome(B) from x2 in Dome(B / 25)."""
    ball = RoundBall(BPoint(uniform_directions(1, 3, rng)[0]), float(rng.uniform(*CONSTRUCTION_BALL_RADII)))
    small = ball.scaled(1.0 / CONSTRUCTION_SHRINK)
    x1 = dome_center(ball)
    if on_axis:
        axis = ball.center.dir
        x2 = exp_ray(dome_center(small), axis, float(rng.uniform(0.0, 2.0)))
    else:
        axis = cap_directions(small.center.dir, 0.5 * small.radius, 1, rng)[0]
        offset = float(angle_between(axis, small.center.dir))
        x2 = exp_ray(dome_center(RoundBall(BPoint(axis), small.radius - offset)), axis, float(rng.uniform(0.0, 2.0)))
    axis = x2.coords / x2.norm
    offset = float(angle_between(axis, ball.center.dir))
    # first point of [o, x2] whose conformal annulus with x2 fits inside B
    start = HPoint(math.tan(math.pi / 4.0 - (ball.radius - offset) / 2.0) * axis)
    span = dist(start, x2)
    near = exp_ray(start, axis, CONSTRUCTION_TRIM)
    far = exp_ray(start, axis, span - CONSTRUCTION_TRIM)
    annulus = conformal_annulus(near, far).round
    if annulus is None:
        raise GeometryError("points on a ray from o must give a round annulus")
    modulus = mod_round_annulus(annulus)
    omega = sphere_measure_constant(2)
    separated = (
        dome_signed_distance(Dome(annulus.inner_ball), x2) < 0.0
        and dome_signed_distance(Dome(annulus.outer_complement), x1) < 0.0
    )
    inside = angle_between(annulus.center.dir, ball.center.dir) + annulus.outer_radius <= ball.radius + 1e-12
    return {
        "ball_radius": ball.radius,
        "on_axis": int(on_axis),
        "distance": dist(x1, x2),
        "start_offset": dist(x1, start),
        "modulus": modulus,
        "trimmed_modulus_error": abs(modulus - omega / (span - 2.0 * CONSTRUCTION_TRIM)),
        "stated_modulus": omega / (dist(x1, x2) - 2.0 * CONSTRUCTION_TRIM),
        "separated": int(separated),
        "inside_ball": int(inside),
        "mass_near_x1": visual_cap_mass(x1, annulus.outer_complement),
        "mass_near_x2": visual_cap_mass(x2, annulus.inner_ball),
    }


def run_modulus_lemmas(
    config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> ExperimentReport:
    """Modulus of round annuli against the distance of points they separate (n = 2 only)."""
    _require_sphere(config)
    report = ExperimentReport("modulus", config_hash(config))
    generators = trial_generators(config.seed, 2 * config.trials)
    rows = map_ordered(_inequality_trial, generators[: config.trials], workers)
    for index, row in enumerate(rows):
        row["trial"] = index
    construction = [
        dict(_construction_trial(rng, index % 2 == 0), trial=index)
        for index, rng in enumerate(generators[config.trials :])
    ]
    report.tables["modulus"] = rows
    report.tables["modulus_construction"] = construction

    valid = [row for row in rows if not row["degenerate"]]
    degenerate = len(rows) - len(valid)
    redraws = sum(int(row["redraws"]) for row in rows)
    report.scalars["degenerate_trials"] = degenerate
    report.scalars["redraws"] = redraws
    if redraws:
        logger.info("modulus: %d point draws fell outside their dome and were re-drawn", redraws)
    violations = sum(1 for row in valid if row["margin"] < -EXACT_TOLERANCE * row["modulus"])
    report.scalars["violations"] = violations
    report.check(
        "modulus.distance_inequality",
        "Mod(A) >= omega_1 / d(x, y) for points on opposite sides of Dome(A)",
        violations == 0 and len(valid) > 0,
        violations,
    )
    feet = max((row["feet_error"] for row in valid), default=float("nan"))
    report.check("modulus.equality_at_feet", "equality at the common-perpendicular feet", feet <= EXACT_TOLERANCE, feet)
    pushed = min((row["pushed_margin"] for row in valid), default=float("nan"))
    report.check("modulus.strict_off_feet", "moving a foot along its wall strictly increases the distance", pushed > 0, pushed)
    center_error = max((row["dome_center_error"] for row in valid), default=float("nan"))
    report.check(
        "modulus.dome_center_distance",
        "the wall center of Dome(B) lies at distance |log cot(r/2)| from o",
        center_error <= EXACT_TOLERANCE,
        center_error,
    )

    on_axis = [row for row in construction if row["on_axis"]]
    stated = max((abs(row["modulus"] - row["stated_modulus"]) for row in on_axis), default=float("nan"))
    report.check(
        "modulus.construction_modulus",
        "with x2 on the axis of B the annulus has Mod = omega_1 (d(x1, x2) - 2)^-1",
        stated <= EXACT_TOLERANCE,
        stated,
    )
    trimmed = max(row["trimmed_modulus_error"] for row in construction)
    report.check("modulus.construction_trimmed", "Mod(A) = omega_1 / d of the trimmed segment", trimmed <= EXACT_TOLERANCE, trimmed)
    shortest = min(row["distance"] for row in construction)
    report.check("modulus.construction_log25", "d(x1, x2) >= log 25", shortest >= math.log(CONSTRUCTION_SHRINK) - 1e-12, shortest)
    start = max(row["start_offset"] for row in construction)
    report.check("modulus.construction_start", "the first fitting point of [o, x2] is within 1/10 of x1", start < 0.1, start)
    report.check(
        "modulus.construction_separates",
        "the annulus lies in B and its dome separates x1 from x2",
        all(row["separated"] and row["inside_ball"] for row in construction),
    )
    mass = min(min(row["mass_near_x1"], row["mass_near_x2"]) for row in construction)
    report.check("modulus.construction_visual_mass", "each complementary cap has visual mass >= 2/3", mass >= 2.0 / 3.0, mass)
    return report


def _circle(annulus_center: np.ndarray, radius: float) -> np.ndarray:
    frame = tangent_frame(annulus_center)
    angles = 2.0 * np.pi * np.arange(CIRCLE_SAMPLES) / CIRCLE_SAMPLES
    ring = np.stack([np.cos(angles), np.sin(angles)], axis=1) @ frame
    return np.cos(radius) * annulus_center + np.sin(radius) * ring


def _plane_normal(points: np.ndarray, inside: np.ndarray) -> np.ndarray:
    """Unit normal of the best-fit plane of points on a circle, on the side of ``inside``."""
    centered = points - points.mean(axis=0)
    normal = np.linalg.svd(centered, full_matrices=False)[2][-1]
    return normal if float(normal @ inside) >= 0 else -normal


def _viewpoint(q: np.ndarray) -> np.ndarray:
    """exp_o(q) in ball coordinates, with |q| capped at MAX_VIEW_DISTANCE."""
    length = float(np.linalg.norm(q))
    if length == 0.0:
        return np.zeros_like(q)
    return math.tanh(min(length, MAX_VIEW_DISTANCE) / 2.0) * q / length


def inscribed_annulus(inner_image: np.ndarray, outer_image: np.ndarray, inside: np.ndarray) -> Tuple[float, np.ndarray]:
    """Largest log(R/r) of a conformally round annulus between two image circles.

    The annulus is concentric as seen from a viewpoint p in H^3, found by Nelder-Mead from o;
    its center is the normal of the inner circle's best-fit plane. Returns (log ratio, p), with
    a log ratio of -inf when no viewpoint separates the circles.
    """

    def radii(q: np.ndarray) -> Tuple[float, float]:
        p = _viewpoint(q)
        inner = normalize_rows(mobius_add(-p, inner_image))
        outer = normalize_rows(mobius_add(-p, outer_image))
        mark = normalize_rows(mobius_add(-p, inside))
        center = _plane_normal(inner, mark)
        return float(angle_between(inner, center).max()), float(angle_between(outer, center).min())

    def objective(q: np.ndarray) -> float:
        inner, outer = radii(q)
        if inner >= outer:
            return 1e3 + inner - outer
        return -math.log(math.tan(outer / 2.0) / math.tan(inner / 2.0))

    simplex = np.vstack([np.zeros(3), VIEW_STEP * np.eye(3)])
    result = minimize(
        objective,
        np.zeros(3),
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-13, "maxiter": 3000},
    )
    inner, outer = radii(result.x)
    if inner >= outer:
        return float("-inf"), _viewpoint(result.x)
    return math.log(math.tan(outer / 2.0) / math.tan(inner / 2.0)), _viewpoint(result.x)


def _image_trial(f: SphereMap, lambda0: float, rng: np.random.Generator) -> Dict[str, object]:
    ball = RoundBall(BPoint(uniform_directions(1, 3, rng)[0]), IMAGE_BALL_RADIUS)
    quarter = ball.scaled(0.25)
    outer = float(rng.uniform(0.5, 1.0)) * quarter.radius
    log_ratio = float(rng.uniform(*LOG_RATIO_RANGE))
    inner = 2.0 * math.atan(math.tan(outer / 2.0) * math.exp(-log_ratio))
    center = cap_directions(quarter.center.dir, quarter.radius - outer, 1, rng)[0]
    annulus = RoundAnnulus(BPoint(center), inner, outer)
    modulus = mod_round_annulus(annulus)
    row: Dict[str, object] = {"log_ratio": log_ratio, "modulus": modulus, "exceedance": 0}
    if modulus >= lambda0:
        row["exceedance"] = 1
        row["reason"] = "modulus above lambda0"
        return row
    inner_circle = _circle(center, inner)
    outer_circle = _circle(center, outer)
    if np.any(f.near_branch(inner_circle)) or np.any(f.near_branch(outer_circle)):
        row["exceedance"] = 1
        row["reason"] = "annulus meets a branch guard"
        return row
    try:
        inner_image = f.evaluate_array(inner_circle)
        outer_image = f.evaluate_array(outer_circle)
        center_image = f.evaluate_array(center)[0]
    except MapEvaluationError as exc:
        row["exceedance"] = 1
        row["reason"] = str(exc)
        return row
    image_ratio, viewpoint = inscribed_annulus(inner_image, outer_image, center_image)
    if not np.isfinite(image_ratio):
        row["exceedance"] = 1
        row["reason"] = "image circles interleave"
        return row
    image_modulus = sphere_measure_constant(2) / image_ratio
    row.update(
        {
            "image_log_ratio": image_ratio,
            "image_modulus": image_modulus,
            "ratio": image_modulus / modulus,
            "viewpoint_distance": 2.0 * math.atanh(float(np.linalg.norm(viewpoint))),
        }
    )
    return row


def run_annulus_image(
    config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> ExperimentReport:
    """Largest round annulus inside f(A) for round annuli A in B / 4 with Mod(A) < lambda0 (n = 2 only)."""
    _require_sphere(config)
    report = ExperimentReport("annulus-image", config_hash(config))
    f = catalog_map(config)
    rows = map_ordered(lambda rng: _image_trial(f, config.lambda0, rng), trial_generators(config.seed, config.trials), workers)
    for index, row in enumerate(rows):
        row["trial"] = index
    report.tables["annulus_image"] = rows

    valid = [row for row in rows if not row["exceedance"]]
    exceedances = len(rows) - len(valid)
    report.scalars["exceedances"] = exceedances
    if exceedances:
        logger.warning("annulus-image: %d of %d trials exceeded lambda0 or degenerated", exceedances, len(rows))
    spread = [max(row["ratio"], 1.0 / row["ratio"]) for row in valid]
    c1 = max(spread, default=float("nan"))
    report.scalars["C1"] = c1
    report.scalars["nominal_distortion"] = f.nominal_distortion
    report.check("annulus_image.exists", "a round annulus A' was found inside f(A)", len(valid) > 0, len(valid))
    report.check("annulus_image.finite_c1", "the empirical C1 is finite", bool(np.isfinite(c1)), c1)
    if is_isometry_trace(f):
        report.check(
            "annulus_image.conformal_unit_c1",
            "a conformal map keeps the modulus: C1 = 1",
            abs(c1 - 1.0) <= CONFORMAL_TOLERANCE,
            c1,
        )
    return report
