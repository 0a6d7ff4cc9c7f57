"""Closed-form geometry of the Poincare ball: distance, geodesics, Busemann functions, visual data.

Tangent vectors are carried in ambient coordinates. Their hyperbolic length at ``x`` is the
Euclidean length times the conformal factor ``2 / (1 - |x|^2)``.
"""
from __future__ import annotations

from typing import Optional, Tuple, Union

import numpy as np

from ..errors import GeometryError
from .points import (
    BPoint,
    HPoint,
    PointLike,
    angle_between,
    conformal_factor,
    coords_of,
    mobius_add,
)


def distance_array(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gap = np.linalg.norm(x - y, axis=-1)
    scale = np.sqrt((1.0 - np.sum(x * x, axis=-1)) * (1.0 - np.sum(y * y, axis=-1)))
    # arccosh(1 + 2 s^2) written as 2 asinh(s), which keeps precision for nearby points
    return 2.0 * np.arcsinh(gap / scale)


def dist(x: HPoint, y: HPoint) -> float:
    return float(distance_array(x.coords, y.coords))


def tangent_norm(x: HPoint, v: np.ndarray) -> float:
    return float(conformal_factor(x.coords) * np.linalg.norm(v))


def exp_ray_array(x: np.ndarray, directions: np.ndarray, t) -> np.ndarray:
    """Vectorized exp_ray; ``directions`` need not be normalized."""
    directions = np.asarray(directions, dtype=float)
    unit = directions / np.linalg.norm(directions, axis=-1, keepdims=True)
    step = np.tanh(np.asarray(t, dtype=float) / 2.0)
    return mobius_add(x, step[..., None] * unit if np.ndim(step) else step * unit)


def exp_ray(x: HPoint, v: np.ndarray, t: float) -> HPoint:
    """Point at distance ``t`` from ``x`` along the geodesic leaving ``x`` in direction ``v``.

    Only the direction of ``v`` matters, so a unit hyperbolic tangent vector and its Euclidean
    normalization give the same ray.
    """
    if t < 0:
        raise GeometryError("exp_ray needs t >= 0")
    v = np.asarray(v, dtype=float)
    if t == 0:
        return x
    if np.linalg.norm(v) == 0:
        raise GeometryError("exp_ray needs a non-zero direction")
    return HPoint(exp_ray_array(x.coords, v, t))


def log_map_array(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    w = mobius_add(-x, y)
    size = np.linalg.norm(w, axis=-1, keepdims=True)
    scale = np.divide(np.arctanh(np.minimum(size, 1.0 - 1e-16)), size, out=np.zeros_like(size), where=size > 0)
    return (2.0 / conformal_factor(x))[..., None] * scale * w if np.ndim(x) > 1 else (2.0 / conformal_factor(x)) * scale * w


def log_map(x: HPoint, y: HPoint) -> np.ndarray:
    """Ambient tangent vector at ``x`` whose hyperbolic length is dist(x, y)."""
    return log_map_array(x.coords, y.coords)


def _boundary_gap2(y: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """|y - theta|^2 for unit theta, exactly 1 at the origin."""
    y = np.asarray(y, dtype=float)
    return 1.0 - 2.0 * np.sum(y * thetas, axis=-1) + np.sum(y * y, axis=-1)


def busemann_array(y: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    gap2 = _boundary_gap2(y, thetas)
    return np.log(gap2) - np.log(1.0 - np.sum(y * y, axis=-1))


def busemann(y: HPoint, theta: BPoint) -> float:
    """B_o(y, theta) = log(|y - theta|^2 / (1 - |y|^2)); zero at the origin."""
    return float(busemann_array(y.coords, theta.dir))


def busemann_euclidean_gradient(y: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Coordinate gradient of B_o(., theta) at ``y``, one row per boundary point."""
    y = np.asarray(y, dtype=float)
    diff = y - thetas
    gap2 = np.sum(diff * diff, axis=-1, keepdims=True)
    return 2.0 * diff / gap2 + 2.0 * y / (1.0 - float(y @ y)) if y.ndim == 1 else (
        2.0 * diff / gap2 + 2.0 * y / (1.0 - np.sum(y * y, axis=-1, keepdims=True))
    )


def direction_to_boundary_array(y: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    factor = conformal_factor(y)
    return -busemann_euclidean_gradient(y, thetas) / np.asarray(factor)[..., None] ** 2 if np.ndim(y) > 1 else (
        -busemann_euclidean_gradient(y, thetas) / factor**2
    )


def direction_to_boundary(y: HPoint, theta: BPoint) -> np.ndarray:
    """Unit tangent n_theta(y) pointing at theta, i.e. minus the gradient of B_o(., theta)."""
    return direction_to_boundary_array(y.coords, theta.dir)


def busemann_hessian(y: HPoint, theta: BPoint) -> np.ndarray:
    """Hessian of B_o(., theta) as a bilinear form on ambient tangent vectors: metric - dB (x) dB."""
    grad = busemann_euclidean_gradient(y.coords, theta.dir)
    factor = float(conformal_factor(y.coords))
    return factor**2 * np.eye(y.dim) - np.outer(grad, grad)


def visual_angle(x: HPoint, theta: BPoint, eta: BPoint) -> float:
    """d_x(theta, eta): angle at x between the rays towards theta and eta."""
    directions = -busemann_euclidean_gradient(x.coords, np.stack([theta.dir, eta.dir]))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    return float(angle_between(directions[0], directions[1]))


def visual_density_array(x: np.ndarray, thetas: np.ndarray, exponent: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return ((1.0 - float(x @ x)) / _boundary_gap2(x, thetas)) ** exponent


def visual_density(x: HPoint, theta: BPoint, exponent: Optional[float] = None) -> float:
    """e^{-E B_o(x, theta)}, the density of vol_x against vol_o.

    The default exponent is n, the boundary Poisson kernel; exponent n - 1 reproduces the
    alternative printed convention and does not integrate to one.
    """
    power = x.n if exponent is None else exponent
    return float(visual_density_array(x.coords, theta.dir, power))


def _diameter_frame(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float]:
    """Direction and length parameter of [x, y] after moving x to the origin."""
    moved = mobius_add(-x, y)
    length = float(np.linalg.norm(moved))
    if length < 1e-14:
        raise GeometryError("segment endpoints coincide")
    return moved / length, length


def _foot_parameter(point: np.ndarray, axis: np.ndarray) -> float:
    """Signed Euclidean parameter of the perpendicular foot of ``point`` on the diameter ``axis``.

    Ideal points have |point| = 1; the result then lies in [-1, 1].
    """
    a = float(point @ axis)
    r2 = float(point @ point)
    return 2.0 * a / ((1.0 + r2) + np.sqrt(max((1.0 + r2) ** 2 - 4.0 * a * a, 0.0)))


def segment_foot(x: HPoint, y: HPoint, p: PointLike) -> Tuple[float, float]:
    """(foot parameter, segment end parameter) of p relative to [x, y] moved to a diameter."""
    axis, length = _diameter_frame(x.coords, y.coords)
    moved = mobius_add(-x.coords, coords_of(p))
    if isinstance(p, BPoint):
        moved = moved / np.linalg.norm(moved)
    return _foot_parameter(moved, axis), length


def convex_project(x: HPoint, y: HPoint, p: PointLike) -> HPoint:
    """Nearest point of [x, y] to p; for ideal p, the minimizer of B(., p) on [x, y]."""
    axis, length = _diameter_frame(x.coords, y.coords)
    foot, _ = segment_foot(x, y, p)
    clamped = min(max(foot, 0.0), length)
    return HPoint(mobius_add(x.coords, clamped * axis))


def law_of_cosines_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Angle opposite side ``a`` of a hyperbolic triangle with sides a, b, c (half-angle form)."""
    a, b, c = (np.asarray(side, dtype=float) for side in (a, b, c))
    ratio = np.sinh((a - b + c) / 2.0) * np.sinh((a + b - c) / 2.0) / (np.sinh(b) * np.sinh(c))
    return 2.0 * np.arcsin(np.sqrt(np.clip(ratio, 0.0, 1.0)))


def triangle_angle(p1: HPoint, p2: HPoint, p3: HPoint) -> float:
    """Angle at p1 between the geodesics [p1, p2] and [p1, p3], measured in the tangent space."""
    u = log_map(p1, p2)
    v = log_map(p1, p3)
    return float(angle_between(u / np.linalg.norm(u), v / np.linalg.norm(v)))


def gromov_angle_bound(a: Union[float, np.ndarray], b, c) -> np.ndarray:
    """4 exp(-(-a + b + c) / 4): bound on the angle opposite ``a``."""
    return 4.0 * np.exp(-0.25 * (-np.asarray(a) + np.asarray(b) + np.asarray(c)))
