"""Equal-weight node sets on S^1 and S^2."""
from __future__ import annotations

import numpy as np

from ..errors import MeasureError

MIN_NODES = {1: 4, 2: 16}
GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def circle_nodes(count: int) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(count) / count
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def fibonacci_nodes(count: int) -> np.ndarray:
    """Fibonacci lattice with half-integer offsets; nearly equal-area cells."""
    index = np.arange(count) + 0.5
    height = 1.0 - 2.0 * index / count
    radius = np.sqrt(1.0 - height * height)
    azimuth = GOLDEN_ANGLE * index
    return np.stack([radius * np.cos(azimuth), radius * np.sin(azimuth), height], axis=1)


def sphere_nodes(n: int, count: int) -> np.ndarray:
    if n not in MIN_NODES:
        raise MeasureError(f"quadrature needs n in (1, 2), got {n}")
    if count < MIN_NODES[n]:
        raise MeasureError(f"quadrature on S^{n} needs at least {MIN_NODES[n]} nodes, got {count}")
    return circle_nodes(count) if n == 1 else fibonacci_nodes(count)
