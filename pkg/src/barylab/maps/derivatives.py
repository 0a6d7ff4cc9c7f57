"""Finite-difference derivatives of boundary maps, distortion and degree estimates."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import DegreeEstimateError, GeometryError, MapEvaluationError
from ..geometry.points import BPoint, angle_between, normalize_rows, tangent_frame
from ..geometry.quadrature import sphere_nodes
from .sphere_maps import SphereMap

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5
STEP_RANGE = (1e-7, 1e-3)
DEGREE_RESIDUAL_LIMIT = 0.2
DEFAULT_DEGREE_NODES = {1: 1024, 2: 8192}


@dataclass(frozen=True)
class DistortionEstimate:
    outer: float
    inner: float
    samples: int
    excluded: int

    @property
    def overall(self) -> float:
        return max(self.outer, self.inner)


def tangent_frames(points: np.ndarray) -> np.ndarray:
    """Stacked positively oriented tangent frames, shape (N, n, n + 1)."""
    return np.stack([tangent_frame(p) for p in np.atleast_2d(points)])


def sphere_log(base: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Log map of the round sphere at ``base`` rows, evaluated at ``targets`` rows."""
    along = np.sum(base * targets, axis=-1, keepdims=True)
    across = targets - along * base
    size = np.linalg.norm(across, axis=-1, keepdims=True)
    angle = angle_between(base, targets)[..., None]
    return np.divide(angle * across, size, out=np.zeros_like(across), where=size > 0)


def _check_step(step: float) -> None:
    if not STEP_RANGE[0] <= step <= STEP_RANGE[1]:
        raise GeometryError(f"finite-difference step {step:g} outside [{STEP_RANGE[0]:g}, {STEP_RANGE[1]:g}]")


def sample_derivatives(f: SphereMap, points: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """Df at each row of ``points`` in orthonormal tangent frames, shape (N, n, n).

    Central differences along great circles through each point, read off in the frame at the
    image point through the sphere log map.
    """
    _check_step(step)
    points = normalize_rows(np.atleast_2d(points))
    frames = tangent_frames(points)
    images = f.evaluate_array(points)
    image_frames = tangent_frames(images)
    columns = []
    for k in range(f.n):
        forward = np.cos(step) * points + np.sin(step) * frames[:, k, :]
        backward = np.cos(step) * points - np.sin(step) * frames[:, k, :]
        difference = (sphere_log(images, f.evaluate_array(forward)) - sphere_log(images, f.evaluate_array(backward))) / (
            2.0 * step
        )
        columns.append(np.einsum("nij,nj->ni", image_frames, difference))
    jacobians = np.stack(columns, axis=-1)
    bad = ~np.all(np.isfinite(jacobians), axis=(1, 2))
    if np.any(bad):
        raise MapEvaluationError("derivative sampling failed", points[np.argmax(bad)])
    return jacobians


def sample_derivative(f: SphereMap, theta: BPoint, step: float = DEFAULT_STEP) -> np.ndarray:
    """Df at theta as an n x n matrix; raises near branch points."""
    if f.near_branch(theta.dir)[0]:
        raise MapEvaluationError(f"{f.label or f.kind} is not differentiable near a branch point", theta.dir)
    return sample_derivatives(f, theta.dir, step)[0]


def distortion_ratios(jacobians: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-sample outer ratio |Df|^n / det, inner ratio det / sigma_min^n, and det."""
    singular = np.linalg.svd(jacobians, compute_uv=False)
    det = np.linalg.det(jacobians)
    with np.errstate(divide="ignore", invalid="ignore"):
        outer = singular[:, 0] ** n / det
        inner = det / singular[:, -1] ** n
    return outer, inner, det


def estimate_distortion(
    f: SphereMap,
    samples: int,
    rng: Optional[np.random.Generator] = None,
    step: float = DEFAULT_STEP,
    det_tolerance: float = 1e-10,
) -> DistortionEstimate:
    """Empirical K_O and K_I over uniformly random sample points.

    Points within the branch guard or with det Df <= det_tolerance are excluded and counted.
    """
    if samples < 100:
        raise GeometryError(f"distortion estimates need at least 100 samples, got {samples}")
    rng = np.random.default_rng(0) if rng is None else rng
    points = normalize_rows(rng.standard_normal((samples, f.dim)))
    keep = ~f.near_branch(points)
    jacobians = sample_derivatives(f, points[keep], step)
    outer, inner, det = distortion_ratios(jacobians, f.n)
    valid = det > det_tolerance
    excluded = samples - int(np.count_nonzero(valid))
    if excluded:
        logger.warning("%s: excluded %d of %d distortion samples near branch points", f.label or f.kind, excluded, samples)
    if not np.any(valid):
        raise MapEvaluationError(f"{f.label or f.kind}: every distortion sample was degenerate")
    return DistortionEstimate(float(np.max(outer[valid])), float(np.max(inner[valid])), samples, excluded)


def estimate_degree(f: SphereMap, nodes: Optional[int] = None, step: float = DEFAULT_STEP) -> float:
    """Jacobian integral of f against the normalized round measure.

    Guarded nodes contribute nothing; the estimate must land within 0.2 of an integer.
    """
    count = DEFAULT_DEGREE_NODES[f.n] if nodes is None else nodes
    points = sphere_nodes(f.n, count)
    keep = ~f.near_branch(points)
    det = np.linalg.det(sample_derivatives(f, points[keep], step))
    estimate = float(np.sum(det) / count)
    residual = abs(estimate - round(estimate))
    if residual > DEGREE_RESIDUAL_LIMIT:
        raise DegreeEstimateError(estimate, residual)
    logger.debug("%s: degree estimate %.6f from %d nodes", f.label or f.kind, estimate, count)
    return estimate
