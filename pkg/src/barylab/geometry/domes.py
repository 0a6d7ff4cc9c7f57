"""Round caps and annuli on the boundary sphere, their domes, visual caps and moduli."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from ..errors import GeometryError
from .hyperbolic import segment_foot
from .isometry import MobiusIsometry
from .points import BPoint, HPoint, angle_between, mobius_add, tangent_frame

WALL_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class RoundBall:
    """Spherical cap B(center, radius) for the angular metric d_o."""

    center: BPoint
    radius: float

    def __post_init__(self) -> None:
        if not 0.0 < self.radius < np.pi:
            raise GeometryError(f"cap radius {self.radius} must lie in (0, pi)")

    def scaled(self, factor: float) -> "RoundBall":
        """The cap factor * B with the same center."""
        if factor <= 0 or factor * self.radius >= np.pi:
            raise GeometryError(f"cannot scale radius {self.radius} by {factor}")
        return RoundBall(self.center, factor * self.radius)

    def contains(self, theta: BPoint) -> bool:
        return bool(angle_between(theta.dir, self.center.dir) <= self.radius)

    @property
    def dim(self) -> int:
        return self.center.dim


@dataclass(frozen=True, eq=False)
class RoundAnnulus:
    center: BPoint
    inner_radius: float
    outer_radius: float

    def __post_init__(self) -> None:
        if not 0.0 < self.inner_radius < self.outer_radius < np.pi:
            raise GeometryError(
                f"annulus radii must satisfy 0 < inner < outer < pi, got {self.inner_radius}, {self.outer_radius}"
            )

    @property
    def inner_ball(self) -> RoundBall:
        return RoundBall(self.center, self.inner_radius)

    @property
    def outer_complement(self) -> RoundBall:
        """The cap bounded by the outer circle on the far side."""
        return RoundBall(-self.center, np.pi - self.outer_radius)

    def contains(self, theta: BPoint) -> bool:
        angle = float(angle_between(theta.dir, self.center.dir))
        return self.inner_radius < angle < self.outer_radius


@dataclass(frozen=True, eq=False)
class Dome:
    """Hyperbolic convex hull of a cap (a closed half-space) or of a round annulus."""

    base: Union[RoundBall, RoundAnnulus]


def dome_center(ball: RoundBall) -> HPoint:
    """Intersection of the wall of Dome(B) with the ray [o, center); at distance log cot(r/2) from o."""
    return HPoint(np.tan(np.pi / 4.0 - ball.radius / 2.0) * ball.center.dir)


def dome_signed_distance(dome: Dome, x: HPoint) -> float:
    """Signed distance from x to the wall of a ball dome; negative inside."""
    if not isinstance(dome.base, RoundBall):
        raise GeometryError("signed distance is defined for ball domes only")
    axis = dome.base.center.dir
    moved = mobius_add(-dome_center(dome.base).coords, x.coords)
    height = 2.0 * float(moved @ axis) / (1.0 - float(moved @ moved))
    return float(-np.arcsinh(height))


def dome_distance(dome: Dome, x: HPoint) -> float:
    """d(x, Dome(B)) for a ball dome."""
    return max(dome_signed_distance(dome, x), 0.0)


def dome_contains(dome: Dome, x: HPoint) -> bool:
    """Points on a wall belong to the dome."""
    if isinstance(dome.base, RoundBall):
        return dome_signed_distance(dome, x) <= WALL_TOLERANCE
    annulus = dome.base
    inner = dome_signed_distance(Dome(annulus.inner_ball), x)
    outer = dome_signed_distance(Dome(annulus.outer_complement), x)
    return inner >= -WALL_TOLERANCE and outer >= -WALL_TOLERANCE


def _cap_circle(ball: RoundBall) -> np.ndarray:
    """Points on the boundary circle of a cap: two for S^1, three for S^2."""
    center = ball.center.dir
    frame = tangent_frame(center)
    if ball.dim == 2:
        offsets = np.array([[1.0], [-1.0]])
    else:
        angles = 2.0 * np.pi * np.arange(3) / 3.0
        offsets = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return np.cos(ball.radius) * center + np.sin(ball.radius) * (offsets @ frame)


def _cap_image(ball: RoundBall, action: Callable[[np.ndarray], np.ndarray]) -> RoundBall:
    """Image of a cap under a boundary action that maps round caps to round caps."""
    circle = action(_cap_circle(ball))
    circle /= np.linalg.norm(circle, axis=-1, keepdims=True)
    inside = action(ball.center.dir)
    inside /= np.linalg.norm(inside)
    if ball.dim == 2:
        chord = circle[1] - circle[0]
        normal = np.array([-chord[1], chord[0]])
    else:
        normal = np.cross(circle[1] - circle[0], circle[2] - circle[0])
    normal /= np.linalg.norm(normal)
    level = float(normal @ circle[0])
    if float(normal @ inside) < level:
        normal, level = -normal, -level
    return RoundBall(BPoint(normal), float(np.arccos(np.clip(level, -1.0, 1.0))))


def visual_cap(x: HPoint, ball: RoundBall) -> RoundBall:
    """The cap B as seen from x: its image under the transvection taking x to o."""
    return _cap_image(ball, lambda points: mobius_add(-x.coords, points))


def map_ball(g: MobiusIsometry, ball: RoundBall) -> RoundBall:
    return _cap_image(ball, g.apply_array)


def cap_mass(radius: float, n: int) -> float:
    """vol_o of a cap of angular radius ``radius`` on S^n."""
    if n == 1:
        return radius / np.pi
    return (1.0 - np.cos(radius)) / 2.0


def visual_cap_mass(x: HPoint, ball: RoundBall) -> float:
    """vol_x(B)."""
    return cap_mass(visual_cap(x, ball).radius, ball.center.n)


def visual_diameter(x: HPoint, ball: RoundBall) -> float:
    """diam_x(B) for the visual metric d_x."""
    return min(2.0 * visual_cap(x, ball).radius, np.pi)


@dataclass(frozen=True)
class ConformalAnnulus:
    """A(x, y): boundary points whose convex projection onto [x, y] lies in the open segment."""

    x: HPoint
    y: HPoint
    round: Optional[RoundAnnulus]

    def contains(self, theta: BPoint) -> bool:
        foot, length = segment_foot(self.x, self.y, theta)
        return 0.0 < foot < length


def _diameter_parameter(point: HPoint, axis: np.ndarray) -> float:
    return float(point.coords @ axis)


def conformal_annulus(x: HPoint, y: HPoint) -> ConformalAnnulus:
    """Membership predicate for A(x, y), with its round form when o lies on the geodesic through x, y."""
    if np.allclose(x.coords, y.coords, atol=1e-14):
        raise GeometryError("conformal annulus needs distinct points")
    anchor = y.coords if y.norm > x.norm else x.coords
    axis = anchor / np.linalg.norm(anchor)
    off_axis = max(
        np.linalg.norm(x.coords - (x.coords @ axis) * axis),
        np.linalg.norm(y.coords - (y.coords @ axis) * axis),
    )
    if off_axis > 1e-12:
        return ConformalAnnulus(x, y, None)
    low, high = sorted((_diameter_parameter(x, axis), _diameter_parameter(y, axis)))
    # foot parameter tan(pi/4 - phi/2) decreases with the angle phi to the axis
    inner = np.pi / 2.0 - 2.0 * np.arctan(high)
    outer = np.pi / 2.0 - 2.0 * np.arctan(low)
    return ConformalAnnulus(x, y, RoundAnnulus(BPoint(axis), float(inner), float(outer)))


def annulus_log_ratio(annulus: RoundAnnulus) -> float:
    """log(R/r) of the concentric representation, via stereographic projection from -center."""
    return float(np.log(np.tan(annulus.outer_radius / 2.0) / np.tan(annulus.inner_radius / 2.0)))


def sphere_measure_constant(n: int) -> float:
    """omega_{n-1}, the volume of the unit (n-1)-sphere."""
    return {1: 2.0, 2: 2.0 * np.pi}[n]


def modulus_from_log_ratio(log_ratio: float, n: int = 2) -> float:
    if log_ratio <= 0:
        raise GeometryError("annulus log ratio must be positive")
    return sphere_measure_constant(n) * log_ratio ** (1 - n)


def mod_round_annulus(annulus: RoundAnnulus) -> float:
    """omega_{n-1} (log R/r)^{1-n}; defined for annuli on S^2."""
    if annulus.center.n != 2:
        raise GeometryError("n=2 required for the conformal modulus")
    return modulus_from_log_ratio(annulus_log_ratio(annulus), 2)


def perpendicular_feet(annulus: RoundAnnulus) -> tuple:
    """Feet of the common perpendicular of the two walls of Dome(A); their distance is log(R/r)."""
    axis = annulus.center.dir
    return (
        HPoint(np.tan(np.pi / 4.0 - annulus.inner_radius / 2.0) * axis),
        HPoint(np.tan(np.pi / 4.0 - annulus.outer_radius / 2.0) * axis),
    )
