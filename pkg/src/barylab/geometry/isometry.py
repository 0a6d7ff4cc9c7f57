"""Orientation-preserving isometries of the ball in the factored form z -> R (a (+) z)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import special_ortho_group

from ..errors import GeometryError
from .hyperbolic import exp_ray, log_map, tangent_norm
from .points import BPoint, HPoint, mobius_add


def _clean_rotation(matrix: np.ndarray) -> np.ndarray:
    """Nearest orthogonal matrix (polar factor); rejects reflections."""
    u, _, vt = np.linalg.svd(np.asarray(matrix, dtype=float))
    rotation = u @ vt
    if np.linalg.det(rotation) < 0:
        raise GeometryError("isometry rotation must preserve orientation")
    return rotation


def plane_rotation(dim: int, angle: float) -> np.ndarray:
    """Rotation by ``angle`` in the plane of the first two axes."""
    rotation = np.eye(dim)
    c, s = np.cos(angle), np.sin(angle)
    rotation[:2, :2] = [[c, -s], [s, c]]
    return rotation


@dataclass(frozen=True, eq=False)
class MobiusIsometry:
    """g(z) = rotation @ (transvection_target (+) z).

    The transvection moves o to ``transvection_target``; the rotation is applied afterwards,
    so g(o) = rotation @ transvection_target.
    """

    rotation: np.ndarray
    transvection_target: HPoint

    def __post_init__(self) -> None:
        rotation = np.array(self.rotation, dtype=float)
        dim = self.transvection_target.dim
        if rotation.shape != (dim, dim):
            raise GeometryError(f"rotation shape {rotation.shape} does not match dimension {dim}")
        if not np.allclose(rotation.T @ rotation, np.eye(dim), atol=1e-9):
            raise GeometryError("rotation matrix is not orthogonal")
        rotation = _clean_rotation(rotation)
        rotation.setflags(write=False)
        object.__setattr__(self, "rotation", rotation)

    @classmethod
    def identity(cls, dim: int) -> "MobiusIsometry":
        return cls(np.eye(dim), HPoint.origin(dim))

    @classmethod
    def transvection(cls, target: HPoint) -> "MobiusIsometry":
        return cls(np.eye(target.dim), target)

    @classmethod
    def pure_rotation(cls, matrix: np.ndarray) -> "MobiusIsometry":
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix, HPoint.origin(matrix.shape[0]))

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, max_radius: float = 2.0) -> "MobiusIsometry":
        """Random rotation (Haar) after a transvection of hyperbolic length at most ``max_radius``."""
        rotation = special_ortho_group.rvs(dim, random_state=rng)
        direction = rng.standard_normal(dim)
        direction /= np.linalg.norm(direction)
        length = rng.uniform(0.0, max_radius)
        return cls(rotation, HPoint(np.tanh(length / 2.0) * direction))

    @property
    def dim(self) -> int:
        return self.transvection_target.dim

    def apply_array(self, points: np.ndarray) -> np.ndarray:
        """Acts on rows of interior or unit boundary coordinates."""
        return mobius_add(self.transvection_target.coords, points) @ self.rotation.T

    def apply(self, x: HPoint) -> HPoint:
        return HPoint(self.apply_array(x.coords))

    def apply_boundary(self, theta: BPoint) -> BPoint:
        return BPoint(self.apply_array(theta.dir))

    def __call__(self, point):
        return self.apply_boundary(point) if isinstance(point, BPoint) else self.apply(point)

    def inverse(self) -> "MobiusIsometry":
        rotation = self.rotation.T
        return MobiusIsometry(rotation, HPoint(-self.rotation @ self.transvection_target.coords))

    def compose(self, other: "MobiusIsometry") -> "MobiusIsometry":
        """self after other."""
        image_of_origin = self.apply_array(other.apply_array(np.zeros(self.dim)))
        basis_images = self.apply_array(other.apply_array(np.eye(self.dim)))
        # (-b) (+) G(z) fixes o, so it is linear; its columns are the images of the basis
        linear = mobius_add(-image_of_origin, basis_images).T
        rotation = _clean_rotation(linear)
        return MobiusIsometry(rotation, HPoint(rotation.T @ image_of_origin))

    def push_tangent(self, x: HPoint, v: np.ndarray) -> np.ndarray:
        """Differential Dg_x(v), exact because g maps geodesics to geodesics."""
        v = np.asarray(v, dtype=float)
        length = tangent_norm(x, v)
        if length == 0:
            return np.zeros_like(v)
        moved = self.apply(exp_ray(x, v, min(length, 1.0)))
        image = log_map(self.apply(x), moved)
        return image * (length / min(length, 1.0))

    def distance_to(self, other: "MobiusIsometry", points: Optional[np.ndarray] = None) -> float:
        """Max Euclidean discrepancy on o and the basis directions."""
        points = np.vstack([np.zeros(self.dim), np.eye(self.dim)]) if points is None else points
        return float(np.max(np.abs(self.apply_array(points) - other.apply_array(points))))
