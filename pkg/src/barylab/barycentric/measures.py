"""Discrete probability measures on S^n: quadrature, pushforward and visual reweighting."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from ..errors import MeasureError
from ..geometry.hyperbolic import visual_density_array
from ..geometry.isometry import MobiusIsometry
from ..geometry.points import HPoint
from ..geometry.quadrature import sphere_nodes

if TYPE_CHECKING:
    from ..maps.sphere_maps import SphereMap

MASS_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atoms ``nodes`` (rows of unit vectors) with nonnegative ``weights`` summing to one."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if nodes.ndim != 2 or nodes.shape[0] != weights.size:
            raise MeasureError("nodes and weights must have matching lengths")
        if nodes.shape[0] < 2:
            raise MeasureError("a measure needs at least two nodes")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise MeasureError("weights must be finite and nonnegative")
        if abs(weights.sum() - 1.0) > MASS_TOLERANCE:
            raise MeasureError(f"total mass {weights.sum():.15f} differs from 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def normalized(cls, nodes: np.ndarray, weights: np.ndarray) -> "DiscreteMeasure":
        weights = np.asarray(weights, dtype=float)
        total = weights.sum()
        if not total > 0:
            raise MeasureError("weights have no mass")
        return cls(nodes, weights / total)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def dim(self) -> int:
        return int(self.nodes.shape[1])

    @property
    def n(self) -> int:
        return self.dim - 1

    def first_moment(self) -> np.ndarray:
        return self.weights @ self.nodes

    def integrate(self, function: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(self.weights @ function(self.nodes))

    def mass_where(self, mask: np.ndarray) -> float:
        return float(self.weights[np.asarray(mask, dtype=bool)].sum())


@lru_cache(maxsize=32)
def _cached_nodes(n: int, count: int) -> np.ndarray:
    nodes = sphere_nodes(n, count)
    nodes.setflags(write=False)
    return nodes


def quadrature(n: int, count: int) -> DiscreteMeasure:
    """Equal-weight representation of vol_o: uniform angles on S^1, a Fibonacci lattice on S^2."""
    nodes = _cached_nodes(n, count)
    return DiscreteMeasure(nodes, np.full(count, 1.0 / count))


def pushforward(f: "SphereMap", measure: DiscreteMeasure) -> DiscreteMeasure:
    return DiscreteMeasure(f.evaluate_array(measure.nodes), measure.weights)


def transport(g: MobiusIsometry, measure: DiscreteMeasure) -> DiscreteMeasure:
    """g_* mu through the boundary action."""
    images = g.apply_array(measure.nodes)
    return DiscreteMeasure(images / np.linalg.norm(images, axis=1, keepdims=True), measure.weights)


def visual_weights(
    nodes: np.ndarray,
    weights: np.ndarray,
    x: HPoint,
    exponent: Optional[float] = None,
    base: Optional[HPoint] = None,
) -> np.ndarray:
    """Weights times d vol_x / d vol_base at the nodes, renormalized."""
    power = x.n if exponent is None else exponent
    density = visual_density_array(x.coords, nodes, power)
    if base is not None:
        density = density / visual_density_array(base.coords, nodes, power)
    scaled = weights * density
    total = scaled.sum()
    if not np.isfinite(total) or total <= 0:
        raise MeasureError(f"visual reweighting at {x} lost all mass")
    return scaled / total


def reweight_visual(
    measure: DiscreteMeasure,
    x: HPoint,
    exponent: Optional[float] = None,
    base: Optional[HPoint] = None,
) -> DiscreteMeasure:
    """Rebase a measure representing vol_base (default o) to vol_x."""
    return DiscreteMeasure(measure.nodes, visual_weights(measure.nodes, measure.weights, x, exponent, base))
