"""Points of the Poincare ball and of its ideal boundary sphere."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import GeometryError

# Numerical floor on 1 - |x|^2; points closer to the sphere are rejected.
BOUNDARY_FLOOR = 1e-12
SUPPORTED_DIMS = (2, 3)


def _as_vector(values, what: str) -> np.ndarray:
    coords = np.array(values, dtype=float).reshape(-1)
    if coords.size not in SUPPORTED_DIMS:
        raise GeometryError(f"{what} must have 2 or 3 coordinates, got {coords.size}")
    if not np.all(np.isfinite(coords)):
        raise GeometryError(f"{what} has non-finite coordinates")
    coords.setflags(write=False)
    return coords


@dataclass(frozen=True, eq=False)
class HPoint:
    """Point of H^{n+1} in ball-model coordinates, |coords| < 1."""

    coords: np.ndarray

    def __post_init__(self) -> None:
        coords = _as_vector(self.coords, "HPoint")
        if float(coords @ coords) >= (1.0 - BOUNDARY_FLOOR) ** 2:
            raise GeometryError(f"HPoint norm {np.linalg.norm(coords):.15f} is not below 1 - {BOUNDARY_FLOOR:g}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def origin(cls, dim: int) -> "HPoint":
        return cls(np.zeros(dim))

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    @property
    def n(self) -> int:
        """Dimension of the boundary sphere."""
        return self.dim - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def __repr__(self) -> str:
        return f"HPoint({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class BPoint:
    """Ideal boundary point, a unit vector of S^n."""

    dir: np.ndarray

    def __post_init__(self) -> None:
        direction = np.array(_as_vector(self.dir, "BPoint"))
        length = float(np.linalg.norm(direction))
        if length < 1e-9:
            raise GeometryError("BPoint direction must be non-zero")
        direction = direction / length
        direction.setflags(write=False)
        object.__setattr__(self, "dir", direction)

    @classmethod
    def from_angle(cls, angle: float) -> "BPoint":
        return cls(np.array([np.cos(angle), np.sin(angle)]))

    @property
    def dim(self) -> int:
        return int(self.dir.size)

    @property
    def n(self) -> int:
        return self.dim - 1

    def __neg__(self) -> "BPoint":
        return BPoint(-self.dir)

    def __repr__(self) -> str:
        return f"BPoint({np.array2string(self.dir, precision=6)})"


PointLike = Union[HPoint, BPoint]


def coords_of(point: PointLike) -> np.ndarray:
    return point.coords if isinstance(point, HPoint) else point.dir


def conformal_factor(x: np.ndarray) -> np.ndarray:
    """2 / (1 - |x|^2), broadcasting over leading axes."""
    x = np.asarray(x, dtype=float)
    return 2.0 / (1.0 - np.sum(x * x, axis=-1))


def mobius_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gyro-addition a (+) b of the ball model; valid for |b| = 1 as well.

    ``z -> a (+) z`` is the transvection taking the origin to ``a``; its inverse is
    ``z -> (-a) (+) z``. Broadcasts over leading axes.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = np.sum(a * b, axis=-1, keepdims=True)
    a2 = np.sum(a * a, axis=-1, keepdims=True)
    b2 = np.sum(b * b, axis=-1, keepdims=True)
    numerator = (1.0 + 2.0 * ab + b2) * a + (1.0 - a2) * b
    denominator = 1.0 + 2.0 * ab + a2 * b2
    return numerator / denominator


def normalize_rows(vectors: np.ndarray) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=float)
    return vectors / np.linalg.norm(vectors, axis=-1, keepdims=True)


def angle_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Angle between unit vectors, accurate near 0 and near pi."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 2.0 * np.arctan2(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


def named_direction(name: str, dim: int) -> np.ndarray:
    """Unit vectors addressed by compass names; ``north`` is the last axis."""
    lookup = {
        "north": (dim - 1, 1.0),
        "south": (dim - 1, -1.0),
        "east": (0, 1.0),
        "west": (0, -1.0),
    }
    if name not in lookup:
        raise GeometryError(f"unknown direction name {name!r}")
    axis, sign = lookup[name]
    direction = np.zeros(dim)
    direction[axis] = sign
    return direction


def tangent_frame(direction: np.ndarray) -> np.ndarray:
    """Orthonormal basis (rows) of the plane orthogonal to a unit vector, positively oriented."""
    direction = np.asarray(direction, dtype=float)
    if direction.size == 2:
        return np.array([[-direction[1], direction[0]]])
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(direction)))] = 1.0
    first = helper - float(helper @ direction) * direction
    first /= np.linalg.norm(first)
    return np.stack([first, np.cross(direction, first)])
