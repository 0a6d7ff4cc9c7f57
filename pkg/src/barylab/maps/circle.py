"""Quasisymmetric circle homeomorphisms followed by the covering z -> z^d."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import MapSpecError
from .sphere_maps import SphereMap

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
Lift = Callable[[np.ndarray], np.ndarray]

_LIFT_PATTERN = re.compile(r"^(id|pw|mob)(.*)$")


def _identity_lift(t: np.ndarray) -> np.ndarray:
    return np.asarray(t, dtype=float)


def _mobius_lift(a: float) -> Lift:
    """Boundary values of the disk automorphism z -> (z + a) / (1 + a z)."""

    def lift(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return t - 2.0 * np.arctan2(a * np.sin(t), 1.0 + a * np.cos(t))

    return lift


def _piecewise_power_lift(k: float) -> Lift:
    """t -> pi (t/pi)^k on [0, pi], mirrored on [pi, 2 pi], extended with period 2 pi."""

    def lift(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        turns = np.floor(t / TWO_PI)
        s = t - TWO_PI * turns
        lower = np.pi * (s / np.pi) ** k
        upper = TWO_PI - np.pi * ((TWO_PI - s) / np.pi) ** k
        return TWO_PI * turns + np.where(s <= np.pi, lower, upper)

    return lift


@dataclass(frozen=True)
class QsCovering:
    """Lift u with u(t + 2 pi) = u(t) + 2 pi, composed with the degree-d covering."""

    lift_name: str
    degree: int
    lift: Lift = field(repr=False)
    parameter: Optional[float] = None

    def homeo_angles(self, t: np.ndarray) -> np.ndarray:
        return self.lift(t)

    def homeo_points(self, t: np.ndarray) -> np.ndarray:
        u = self.lift(t)
        return np.stack([np.cos(u), np.sin(u)], axis=-1)

    def as_sphere_map(self) -> SphereMap:
        def evaluate(points: np.ndarray) -> np.ndarray:
            t = np.arctan2(points[:, 1], points[:, 0])
            u = self.degree * self.lift(t)
            return np.stack([np.cos(u), np.sin(u)], axis=1)

        return SphereMap("qs_circle", 1, self.degree, 1.0, evaluate, label=f"qs:{self.lift_name};deg={self.degree}")


def _build_lift(token: str) -> tuple:
    match = _LIFT_PATTERN.match(token)
    if match is None:
        raise MapSpecError(token, token, "unknown circle lift")
    family, raw = match.groups()
    if family == "id":
        if raw:
            raise MapSpecError(token, raw, "identity lift takes no parameter")
        return _identity_lift, None
    try:
        value = float(raw)
    except ValueError as exc:
        raise MapSpecError(token, raw, "lift parameter is not a number") from exc
    if family == "pw":
        if value <= 0:
            raise MapSpecError(token, raw, "non-monotone lift: piecewise power exponent must be positive")
        return _piecewise_power_lift(value), value
    if not -1.0 < value < 1.0:
        raise MapSpecError(token, raw, "non-monotone lift: Mobius parameter must satisfy |a| < 1")
    return _mobius_lift(value), value


def make_qs_covering(lift_token: str, degree: int) -> QsCovering:
    """Build a covering from a lift token (``id``, ``pw<k>`` or ``mob<a>``) and a degree."""
    if degree < 1:
        raise MapSpecError(lift_token, str(degree), "covering degree must be at least 1")
    lift, parameter = _build_lift(lift_token)
    grid = np.linspace(0.0, TWO_PI, 4097)
    values = lift(grid)
    if np.any(np.diff(values) <= 0):
        raise MapSpecError(lift_token, lift_token, "non-monotone lift")
    drift = np.max(np.abs(lift(grid + TWO_PI) - values - TWO_PI))
    if drift > 1e-10:
        raise MapSpecError(lift_token, lift_token, f"lift is not periodic (drift {drift:.2e})")
    return QsCovering(lift_token, degree, lift, parameter)


def _chordal(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 2.0 * np.abs(np.sin((a - b) / 2.0))


def estimate_eta(covering: QsCovering, t: float, samples: int, rng: np.random.Generator) -> float:
    """Empirical eta(t): sup |h(x)-h(y)| / |h(x)-h(z)| over sampled triples with |x-y| <= t |x-z| (chordal).

    The degree-one homeomorphism of the covering is sampled; y is placed at the extremal chordal
    distance min(t |x-z|, 2) on either side of x.
    """
    if t <= 0:
        raise ValueError("eta is sampled at t > 0")
    x = rng.uniform(0.0, TWO_PI, samples)
    z = rng.uniform(0.0, TWO_PI, samples)
    base = _chordal(x, z)
    keep = base > 1e-9
    x, z, base = x[keep], z[keep], base[keep]
    reach = 2.0 * np.arcsin(np.minimum(t * base, 2.0) / 2.0)
    hx, hz = covering.homeo_angles(x), covering.homeo_angles(z)
    denominator = _chordal(hx, hz)
    best = 0.0
    for sign in (1.0, -1.0):
        hy = covering.homeo_angles(x + sign * reach)
        best = max(best, float(np.max(_chordal(hx, hy) / denominator)))
    logger.debug("eta(%g) over %d triples: %.6f", t, x.size, best)
    return best
