"""Map specification strings, e.g. ``power:3``, ``stretch:2.0@north``, ``qs:pw2;deg=2``, ``compose:a|b``."""
from __future__ import annotations

from typing import Callable, Dict, List

import numpy as np

from ..errors import GeometryError, MapSpecError
from ..geometry.isometry import MobiusIsometry, plane_rotation
from ..geometry.points import BPoint, HPoint, named_direction
from .circle import make_qs_covering
from .sphere_maps import SphereMap, compose, make_mobius_trace, make_power_map, make_radial_stretch, make_winding_map


def _integer(spec: str, token: str, what: str) -> int:
    try:
        value = int(token)
    except ValueError as exc:
        raise MapSpecError(spec, token, f"{what} must be an integer") from exc
    if value < 1:
        raise MapSpecError(spec, token, f"{what} must be at least 1")
    return value


def _number(spec: str, token: str, what: str) -> float:
    try:
        value = float(token)
    except ValueError as exc:
        raise MapSpecError(spec, token, f"{what} must be a number") from exc
    if not np.isfinite(value):
        raise MapSpecError(spec, token, f"{what} must be finite")
    return value


def _vector(spec: str, token: str, what: str, dim: int) -> np.ndarray:
    parts = token.split(",")
    if len(parts) != dim:
        raise MapSpecError(spec, token, f"{what} needs {dim} coordinates")
    return np.array([_number(spec, part, what) for part in parts])


def _parse_power(spec: str, body: str, n: int) -> SphereMap:
    return make_power_map(_integer(spec, body, "power degree"), n)


def _parse_winding(spec: str, body: str, n: int) -> SphereMap:
    if n != 2:
        raise MapSpecError(spec, "winding", "winding maps act on S^2 only")
    return make_winding_map(_integer(spec, body, "winding degree"))


def _parse_stretch(spec: str, body: str, n: int) -> SphereMap:
    alpha_token, _, pivot_token = body.partition("@")
    alpha = _number(spec, alpha_token, "stretch exponent")
    if alpha <= 0:
        raise MapSpecError(spec, alpha_token, "stretch exponent must be positive")
    pivot_token = pivot_token or "north"
    try:
        pivot = named_direction(pivot_token, n + 1)
    except GeometryError:
        pivot = _vector(spec, pivot_token, "stretch pivot", n + 1)
    if np.linalg.norm(pivot) == 0:
        raise MapSpecError(spec, pivot_token, "stretch pivot must be non-zero")
    return make_radial_stretch(alpha, BPoint(pivot))


def _parse_mobius(spec: str, body: str, n: int) -> SphereMap:
    target_token, _, option = body.partition(";")
    target = _vector(spec, target_token, "Mobius target", n + 1)
    if np.linalg.norm(target) >= 1.0 - 1e-9:
        raise MapSpecError(spec, target_token, "Mobius target must lie inside the unit ball")
    angle = 0.0
    if option:
        key, _, value = option.partition("=")
        if key != "rot":
            raise MapSpecError(spec, option, "unknown Mobius option")
        angle = _number(spec, value, "rotation angle")
    isometry = MobiusIsometry(plane_rotation(n + 1, angle), HPoint(target))
    return make_mobius_trace(isometry, label=f"mobius:{body}")


def _parse_qs(spec: str, body: str, n: int) -> SphereMap:
    if n != 1:
        raise MapSpecError(spec, "qs", "quasisymmetric coverings act on S^1 only")
    lift_token, _, option = body.partition(";")
    degree = 1
    if option:
        key, _, value = option.partition("=")
        if key != "deg":
            raise MapSpecError(spec, option, "unknown covering option")
        degree = _integer(spec, value, "covering degree")
    try:
        return make_qs_covering(lift_token, degree).as_sphere_map()
    except MapSpecError as exc:
        raise MapSpecError(spec, exc.token, str(exc).split(":")[0]) from exc


def _parse_compose(spec: str, body: str, n: int) -> SphereMap:
    parts = body.split("|")
    if len(parts) < 2 or not all(parts):
        raise MapSpecError(spec, body, "compose needs at least two non-empty maps")
    return compose([parse_map_spec(part, n) for part in parts])


MAP_PARSERS: Dict[str, Callable[[str, str, int], SphereMap]] = {
    "power": _parse_power,
    "stretch": _parse_stretch,
    "mobius": _parse_mobius,
    "winding": _parse_winding,
    "qs": _parse_qs,
    "compose": _parse_compose,
}


def parse_map_spec(spec: str, n: int) -> SphereMap:
    """Build a catalog map on S^n from its specification string."""
    if n not in (1, 2):
        raise MapSpecError(spec, str(n), "n must be 1 or 2")
    kind, sep, body = spec.strip().partition(":")
    if not sep:
        raise MapSpecError(spec, spec, "missing ':' after the map kind")
    if kind not in MAP_PARSERS:
        raise MapSpecError(spec, kind, f"unknown map kind (expected one of {', '.join(MAP_PARSERS)})")
    if not body:
        raise MapSpecError(spec, kind, "missing map parameters")
    try:
        parsed = MAP_PARSERS[kind](spec, body, n)
    except GeometryError as exc:
        raise MapSpecError(spec, body, str(exc)) from exc
    return parsed


def map_spec_kinds() -> List[str]:
    return list(MAP_PARSERS)
