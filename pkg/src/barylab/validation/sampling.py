"""Direction and boundary-point samplers shared by the suites."""
from __future__ import annotations

import math

import numpy as np
from scipy.spatial.transform import Rotation

from ..geometry.points import normalize_rows, tangent_frame
from ..geometry.quadrature import fibonacci_nodes


def antithetic_directions(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Equal-area unit directions in antithetic pairs +v, -v, randomly rotated.

    ``count`` is rounded up to an even number; rows ``k`` and ``k + count // 2`` are opposite.
    """
    half = max(1, math.ceil(count / 2))
    if dim == 2:
        angles = rng.uniform(0.0, np.pi) + np.pi * np.arange(half) / half
        base = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    else:
        rotation = Rotation.from_quat(normalize_rows(rng.standard_normal(4)))
        base = rotation.apply(fibonacci_nodes(half))
    return np.vstack([base, -base])


def uniform_directions(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    return normalize_rows(rng.standard_normal((count, dim)))


def cap_directions(center: np.ndarray, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points uniform for vol_o in the cap of angular radius ``radius`` about ``center``."""
    center = np.asarray(center, dtype=float)
    frame = tangent_frame(center)
    if center.size == 2:
        angles = rng.uniform(-radius, radius, size=count)
        return np.cos(angles)[:, None] * center + np.sin(angles)[:, None] * frame[0]
    heights = rng.uniform(np.cos(radius), 1.0, size=count)
    azimuths = rng.uniform(0.0, 2.0 * np.pi, size=count)
    sides = np.sqrt(np.clip(1.0 - heights**2, 0.0, None))
    offsets = np.stack([np.cos(azimuths), np.sin(azimuths)], axis=1) * sides[:, None]
    return normalize_rows(heights[:, None] * center + offsets @ frame)
