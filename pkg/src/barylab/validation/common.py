"""Helpers shared by the verification suites."""
from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..barycentric.extension import BarycentricExtension, normalize
from ..config import ExperimentConfig, SolverSettings
from ..errors import ConvergenceError, GeometryError, MapEvaluationError, MeasureError
from ..geometry.isometry import MobiusIsometry
from ..geometry.points import HPoint
from ..maps.sphere_maps import SphereMap
from ..maps.spec_parser import parse_map_spec

# failures recorded per sample instead of aborting a suite
SAMPLE_ERRORS = (ConvergenceError, MeasureError, GeometryError, MapEvaluationError)


def catalog_map(config: ExperimentConfig) -> SphereMap:
    return parse_map_spec(config.map_spec, config.n)


def normalized_map(config: ExperimentConfig) -> Tuple[SphereMap, SphereMap, MobiusIsometry]:
    """(catalog map, normalized map, normalizing transvection)."""
    f = catalog_map(config)
    balanced, h = normalize(f, config.quadrature_N)
    return f, balanced, h


def extension_for(
    f: SphereMap, config: ExperimentConfig, settings: Optional[SolverSettings] = None, tol: Optional[float] = None
) -> BarycentricExtension:
    settings = settings or SolverSettings()
    return BarycentricExtension(
        f,
        config.quadrature_N,
        config.density_exponent,
        tol=settings.barycenter_tol if tol is None else tol,
        max_iter=settings.barycenter_max_iter,
    )


def point_at(direction: np.ndarray, distance: float) -> HPoint:
    """exp_o(distance * direction)."""
    return HPoint(np.tanh(distance / 2.0) * np.asarray(direction, dtype=float))


def distance_from_origin(points: np.ndarray) -> np.ndarray:
    radii = np.linalg.norm(np.atleast_2d(points), axis=1)
    return 2.0 * np.arctanh(np.clip(radii, 0.0, 1.0 - 1e-16))


def is_isometry_trace(f: SphereMap) -> bool:
    return f.kind == "mobius_boundary"


def describe_point(point: np.ndarray) -> str:
    return np.array2string(np.asarray(point), precision=6, separator=",")
