"""Normalized families f_m = h_m o f o g_m and the points where they stop converging."""
from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..barycentric.extension import normalize
from ..config import ExperimentConfig, SolverSettings, config_hash
from ..geometry.isometry import MobiusIsometry
from ..geometry.points import HPoint, angle_between
from ..geometry.quadrature import sphere_nodes
from ..maps.sphere_maps import SphereMap, compose, make_mobius_trace
from ..workflows.parallel import map_ordered, trial_generators
from .common import catalog_map, extension_for
from .report import ExperimentReport
from .sampling import uniform_directions

logger = logging.getLogger(__name__)

GRID_SIZE = {1: 720, 2: 2000}
WITNESS_SIZE = {1: 12, 2: 16}
CAUCHY_TOLERANCE = 0.1
ORIGIN_TOLERANCE = 1e-6
MIN_DIAMETER = 0.5
CAP_RADII = (0.8, 0.4, 0.2, 0.1)
NEIGHBOR_FACTOR = 2.5


def _family_member(f: SphereMap, target: np.ndarray, length: float, quadrature_size: int) -> SphereMap:
    g = MobiusIsometry.transvection(HPoint(math.tanh(length / 2.0) * target))
    balanced, _ = normalize(compose([f, make_mobius_trace(g, label=f"transvection:{length:g}")]), quadrature_size)
    return balanced


def singular_clusters(grid: np.ndarray, gaps: np.ndarray, tolerance: float) -> List[Tuple[np.ndarray, float]]:
    """Connected clusters of grid points where ``gaps`` exceeds ``tolerance``, as (center, radius) caps.

    Each center is the cluster's worst point; the radius reaches its farthest member.
    """
    bad = np.flatnonzero(gaps > tolerance)
    if bad.size == 0:
        return []
    spacing = math.sqrt(4.0 * math.pi / grid.shape[0]) if grid.shape[1] == 3 else 2.0 * math.pi / grid.shape[0]
    pairs = cKDTree(grid[bad]).query_pairs(NEIGHBOR_FACTOR * spacing, output_type="ndarray")
    adjacency = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])) if len(pairs) else ([], ([], [])),
        shape=(bad.size, bad.size),
    )
    count, labels = connected_components(adjacency, directed=False)
    caps = []
    for label in range(count):
        members = bad[labels == label]
        center = grid[members[np.argmax(gaps[members])]]
        caps.append((center, float(angle_between(grid[members], center).max())))
    return caps


def run_compactness_demo(
    config: ExperimentConfig,
    workers: Optional[int] = None,
    settings: Optional[SolverSettings] = None,
    step: float = 1.0,
) -> ExperimentReport:
    """f_m = normalize(f o g_m) for transvections g_m of length m * step toward a random theta*.

    Checks F_{f_m}(o) = o, detects the caps where consecutive members stay apart, and bounds their
    number by the degree of f. ``step = 0`` gives the constant family.
    """
    report = ExperimentReport("compactness", config_hash(config))
    f = catalog_map(config)
    dim = config.n + 1
    (rng,) = trial_generators(config.seed, 1)
    target = uniform_directions(1, dim, rng)[0]
    lengths = [m * step for m in range(1, config.family_size + 1)]
    family = map_ordered(lambda length: _family_member(f, target, length, config.quadrature_N), lengths, workers)

    grid = sphere_nodes(config.n, GRID_SIZE[config.n])
    values = [member.evaluate_array(grid) for member in family]
    gaps = [angle_between(current, following) for current, following in zip(values, values[1:])]
    origin = HPoint.origin(dim)
    rows: List[Dict[str, object]] = []
    for index, (member, length) in enumerate(zip(family, lengths)):
        center = extension_for(member, config, settings)(origin)
        rows.append(
            {
                "m": index + 1,
                "length": length,
                "origin_error": 2.0 * math.atanh(center.norm),
                "sup_gap_to_next": float(gaps[index].max()) if index < len(gaps) else None,
            }
        )
    report.tables["compactness"] = rows

    caps = singular_clusters(grid, gaps[-1], CAUCHY_TOLERANCE)
    centers = np.array([center for center, _ in caps]).reshape(-1, dim)
    cap_rows: List[Dict[str, object]] = []
    for radius in CAP_RADII:
        if len(centers):
            outside = np.all(angle_between(grid[:, None, :], centers[None, :, :]) > radius, axis=1)
        else:
            outside = np.ones(grid.shape[0], dtype=bool)
        for index, gap in enumerate(gaps):
            cap_rows.append(
                {
                    "cap_radius": radius,
                    "m": index + 1,
                    "caps": len(caps),
                    "sup_outside": float(gap[outside].max()) if np.any(outside) else 0.0,
                }
            )
    report.tables["compactness_caps"] = cap_rows

    worst_origin = max(row["origin_error"] for row in rows)
    witnesses = family[-1].evaluate_array(sphere_nodes(config.n, WITNESS_SIZE[config.n]))
    diameter = float(angle_between(witnesses[:, None, :], witnesses[None, :, :]).max())
    degree = f.nominal_degree
    report.scalars["singular_caps"] = len(caps)
    report.scalars["degree"] = degree
    report.scalars["witness_diameter"] = diameter
    for index, (center, radius) in enumerate(caps):
        report.note(f"singular cap {index}: center {np.round(center, 6).tolist()}, radius {radius:.4f}")
    logger.info("compactness: %d singular caps, witness diameter %.4f", len(caps), diameter)

    report.check(
        "compactness.normalized_at_origin",
        "every normalized member has F(o) = o",
        worst_origin <= ORIGIN_TOLERANCE,
        worst_origin,
    )
    report.check(
        "compactness.singular_set_bound",
        "the detected singular set has at most deg f caps",
        len(caps) <= degree,
        len(caps),
    )
    report.check(
        "compactness.non_constant_limit",
        f"the last member spreads a fixed grid over diameter >= {MIN_DIAMETER:g}",
        diameter >= MIN_DIAMETER,
        diameter,
    )
    return report
