"""Monte Carlo volume non-contraction: how many rays from x land in the dome of a small cap."""
from __future__ import annotations

import logging
from typing import Dict, List, Optional

import numpy as np

from ..barycentric.measures import quadrature, visual_weights
from ..config import ExperimentConfig, SolverSettings, config_hash
from ..geometry.domes import Dome, RoundBall, dome_contains, map_ball
from ..geometry.hyperbolic import exp_ray_array
from ..geometry.isometry import MobiusIsometry
from ..geometry.points import BPoint, HPoint, angle_between
from ..workflows.parallel import map_ordered, trial_generators
from .common import SAMPLE_ERRORS, catalog_map, extension_for, is_isometry_trace, point_at
from .report import ExperimentReport, fraction
from .sampling import antithetic_directions, uniform_directions

logger = logging.getLogger(__name__)

BASE_POINTS = 2
BASE_DISTANCE = 1.0
CAP_CENTERS = 8
ISOMETRY_TOLERANCE = 2e-2


def _base_points(config: ExperimentConfig, rng: np.random.Generator) -> List[HPoint]:
    dim = config.n + 1
    extra = [point_at(direction, BASE_DISTANCE) for direction in uniform_directions(BASE_POINTS - 1, dim, rng)]
    return [HPoint.origin(dim)] + extra


def _caps_seen_from(y: HPoint, centers: np.ndarray, delta: float) -> List[RoundBall]:
    """Caps of visual diameter ``delta`` as seen from y, one per center direction."""
    to_y = MobiusIsometry.transvection(y)
    return [map_ball(to_y, RoundBall(BPoint(center), delta / 2.0)) for center in centers]


def run_volume_noncontraction(
    config: ExperimentConfig, workers: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> ExperimentReport:
    """Fraction of directions v at x with F_f(exp_x(R v)) in Dome(B), for caps B with diam_{F(x)} B = delta.

    The grid holds o and BASE_POINTS - 1 random points at distance BASE_DISTANCE, each R in
    ``config.radii`` and CAP_CENTERS cap centers; caps for different deltas share their centers.
    """
    report = ExperimentReport("volume", config_hash(config))
    f = catalog_map(config)
    extension = extension_for(f, config, settings)
    deltas = sorted(config.deltas, reverse=True)
    rng_points, rng_centers, rng_directions = trial_generators(config.seed, 3)
    dim = config.n + 1
    base_measure = quadrature(config.n, config.quadrature_N)
    images_of_nodes = f.evaluate_array(base_measure.nodes)

    rows: List[Dict[str, object]] = []
    failures = 0
    isometry_gap = 0.0
    worst: Dict[tuple, float] = {}
    for base_index, x in enumerate(_base_points(config, rng_points)):
        y = extension(x)
        centers = uniform_directions(CAP_CENTERS, dim, rng_centers)
        directions = antithetic_directions(config.directions, dim, rng_directions)
        node_weights = visual_weights(base_measure.nodes, base_measure.weights, x, config.exponent)
        for radius in config.radii:
            targets = exp_ray_array(x.coords, directions, np.full(len(directions), radius))

            def image(point: np.ndarray) -> Optional[HPoint]:
                try:
                    return extension(HPoint(point))
                except SAMPLE_ERRORS as exc:
                    logger.warning("volume sample dropped: %s", exc)
                    return None

            images = [value for value in map_ordered(image, targets, workers) if value is not None]
            failures += len(targets) - len(images)
            for delta in deltas:
                if delta >= np.pi:
                    caps: List[Optional[RoundBall]] = [None]
                else:
                    caps = list(_caps_seen_from(y, centers, delta))
                for center_index, cap in enumerate(caps):
                    if cap is None:
                        hits = len(images)
                        pullback = 1.0
                    else:
                        dome = Dome(cap)
                        hits = sum(dome_contains(dome, value) for value in images)
                        inside = angle_between(images_of_nodes, cap.center.dir) <= cap.radius
                        pullback = float(node_weights[inside].sum())
                    share = fraction(hits, len(images))
                    rows.append(
                        {
                            "base": base_index,
                            "radius": radius,
                            "delta": delta,
                            "cap": center_index,
                            "fraction": share,
                            "pullback_mass": pullback,
                            "samples": len(images),
                        }
                    )
                    key = (radius, delta)
                    worst[key] = max(worst.get(key, 0.0), share)
                    if is_isometry_trace(f) and radius == config.radii[-1]:
                        isometry_gap = max(isometry_gap, abs(share - pullback))
    report.tables["volume"] = rows

    monotone = True
    for radius in config.radii:
        etas = [worst[(radius, delta)] for delta in deltas]
        for delta, eta in zip(deltas, etas):
            report.scalars[f"eta_R{radius:g}_delta{delta:g}"] = eta
        monotone &= all(later <= earlier for earlier, later in zip(etas, etas[1:]))
        logger.info("volume R=%g: worst fractions %s over deltas %s", radius, etas, deltas)
    report.check(
        "volume.monotone_in_delta",
        "the worst dome-hit fraction does not increase as delta decreases",
        monotone,
    )
    report.check("volume.no_solver_failures", "every sampled ray endpoint was solved", failures == 0, failures)
    report.note(
        f"grid: {BASE_POINTS} base points (o and distance {BASE_DISTANCE:g}), radii {list(config.radii)}, "
        f"{CAP_CENTERS} cap centers, {config.directions} directions"
    )
    if is_isometry_trace(f):
        report.check(
            "volume.isometry_matches_cap_measure",
            "for an isometry trace the fraction matches the visual mass of the pulled-back cap",
            isometry_gap <= ISOMETRY_TOLERANCE,
            isometry_gap,
        )
    return report
