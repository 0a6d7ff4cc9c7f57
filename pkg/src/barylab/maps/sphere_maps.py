"""Catalog of closed-form boundary maps S^n -> S^n."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Dict, Sequence

import numpy as np

from ..errors import GeometryError, MapEvaluationError
from ..geometry.isometry import MobiusIsometry
from ..geometry.points import BPoint, normalize_rows

# Angular guard around branch points and chart singularities.
BRANCH_GUARD = 1e-4

MAP_KINDS = ("power", "mobius_boundary", "radial_stretch", "winding", "qs_circle", "composition")

ArrayMap = Callable[[np.ndarray], np.ndarray]
BranchGuard = Callable[[np.ndarray], np.ndarray]


def _no_branch(points: np.ndarray) -> np.ndarray:
    return np.zeros(np.atleast_2d(points).shape[0], dtype=bool)


@dataclass(frozen=True)
class SphereMap:
    """A boundary map with its nominal degree and distortion.

    ``evaluator`` maps rows of unit vectors to rows of unit vectors; ``near_branch`` flags rows
    within the angular guard of a branch point or chart singularity.
    """

    kind: str
    n: int
    nominal_degree: int
    nominal_distortion: float
    evaluator: ArrayMap = field(repr=False)
    near_branch: BranchGuard = field(default=_no_branch, repr=False)
    label: str = ""
    chart: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in MAP_KINDS:
            raise GeometryError(f"unknown map kind {self.kind!r}")
        if self.nominal_degree < 1 or self.nominal_distortion < 1.0:
            raise GeometryError("sphere maps need degree >= 1 and distortion >= 1")

    @property
    def dim(self) -> int:
        return self.n + 1

    def evaluate_array(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise GeometryError(f"{self.label or self.kind} acts on S^{self.n}, got points of dimension {points.shape[1]}")
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            images = self.evaluator(points)
        bad = ~np.all(np.isfinite(images), axis=1)
        if np.any(bad):
            raise MapEvaluationError(f"{self.label or self.kind} produced non-finite values", points[np.argmax(bad)])
        return normalize_rows(images)

    def __call__(self, theta: BPoint) -> BPoint:
        return BPoint(self.evaluate_array(theta.dir)[0])


def _polar_angle_power(points: np.ndarray, pole: np.ndarray, exponent: float) -> np.ndarray:
    """New angle from ``pole`` after tan(phi/2) -> tan(phi/2)^exponent, computed as an atan2."""
    near = np.linalg.norm(points - pole, axis=1)
    far = np.linalg.norm(points + pole, axis=1)
    return 2.0 * np.arctan2(near**exponent, far**exponent)


def _pole_guard(pole: np.ndarray) -> BranchGuard:
    def guard(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.abs(points @ pole) >= np.cos(BRANCH_GUARD)

    return guard


def _azimuth_multiply(points: np.ndarray, degree: int, polar: np.ndarray) -> np.ndarray:
    """Rebuild points on S^2 from a new polar angle and the azimuth multiplied by ``degree``."""
    horizontal = points[:, 0] + 1j * points[:, 1]
    size = np.abs(horizontal)
    unit = np.where(size > 0, horizontal / np.where(size > 0, size, 1.0), 1.0 + 0j) ** degree
    return np.stack([np.sin(polar) * unit.real, np.sin(polar) * unit.imag, np.cos(polar)], axis=1)


def make_power_map(degree: int, n: int) -> SphereMap:
    """z -> z^d: on S^1 the angle is multiplied by d, on S^2 it acts in the stereographic chart sending the north pole to 0."""
    if degree < 1:
        raise GeometryError("power maps need degree >= 1; constant maps are excluded")
    north = np.array([0.0, 0.0, 1.0])

    def evaluate(points: np.ndarray) -> np.ndarray:
        if n == 1:
            image = (points[:, 0] + 1j * points[:, 1]) ** degree
            return np.stack([image.real, image.imag], axis=1)
        return _azimuth_multiply(points, degree, _polar_angle_power(points, north, degree))

    guard = _pole_guard(north) if n == 2 and degree > 1 else _no_branch
    return SphereMap("power", n, degree, 1.0, evaluate, guard, f"power:{degree}", {"chart": "north pole"})


def make_winding_map(degree: int) -> SphereMap:
    """Azimuth times d on S^2, polar angle unchanged; distortion exactly d."""
    if degree < 1:
        raise GeometryError("winding maps need degree >= 1")
    north = np.array([0.0, 0.0, 1.0])

    def evaluate(points: np.ndarray) -> np.ndarray:
        polar = np.arctan2(np.linalg.norm(points[:, :2], axis=1), points[:, 2])
        return _azimuth_multiply(points, degree, polar)

    return SphereMap("winding", 2, degree, float(degree), evaluate, _pole_guard(north), f"winding:{degree}")


def make_radial_stretch(alpha: float, pivot: BPoint) -> SphereMap:
    """z -> z |z|^(alpha-1) in the stereographic chart sending pivot to 0 and its antipode to infinity."""
    if alpha <= 0:
        raise GeometryError(f"stretch exponent must be positive, got {alpha}")
    center = pivot.dir
    n = pivot.n

    def evaluate(points: np.ndarray) -> np.ndarray:
        along = points @ center
        across = points - along[:, None] * center
        size = np.linalg.norm(across, axis=1)
        polar = _polar_angle_power(points, center, alpha)
        direction = np.divide(across, size[:, None], out=np.zeros_like(across), where=size[:, None] > 0)
        moved = np.cos(polar)[:, None] * center + np.sin(polar)[:, None] * direction
        # pivot and antipode are fixed
        return np.where(size[:, None] > 0, moved, points)

    guard = _pole_guard(center) if alpha != 1.0 else _no_branch
    distortion = max(alpha, 1.0 / alpha) ** (n - 1)
    label = f"stretch:{alpha:g}@{','.join(f'{c:g}' for c in center)}"
    return SphereMap("radial_stretch", n, 1, distortion, evaluate, guard, label, {"chart": "pivot", "pivot": center.tolist()})


def make_mobius_trace(isometry: MobiusIsometry, label: str = "mobius") -> SphereMap:
    """Boundary action of an isometry; conformal of degree one."""
    return SphereMap(
        "mobius_boundary",
        isometry.dim - 1,
        1,
        1.0,
        isometry.apply_array,
        _no_branch,
        label,
        {"target": isometry.apply_array(np.zeros(isometry.dim)).tolist()},
    )


def compose(maps: Sequence[SphereMap]) -> SphereMap:
    """maps[0] after maps[1] after ...; the right-most map is applied first."""
    if not maps:
        raise GeometryError("compose needs at least one map")
    if len({m.n for m in maps}) != 1:
        raise GeometryError("composed maps must act on the same sphere")
    ordered = list(reversed(maps))

    def evaluate(points: np.ndarray) -> np.ndarray:
        return reduce(lambda acc, m: m.evaluate_array(acc), ordered, points)

    def guard(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        flagged = np.zeros(points.shape[0], dtype=bool)
        current = points
        for m in ordered:
            flagged |= m.near_branch(current)
            current = m.evaluate_array(current)
        return flagged

    return SphereMap(
        "composition",
        maps[0].n,
        int(np.prod([m.nominal_degree for m in maps])),
        float(np.prod([m.nominal_distortion for m in maps])),
        evaluate,
        guard,
        "compose:" + "|".join(m.label for m in maps),
    )
