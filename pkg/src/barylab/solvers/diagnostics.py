"""Monte Carlo diagnostics around the vertex x_R where d(F, h_R) is largest."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np

from ..barycentric.extension import BarycentricExtension
from ..geometry.hyperbolic import distance_array, exp_ray_array, gromov_angle_bound, law_of_cosines_angle, log_map_array
from ..geometry.points import HPoint, angle_between, normalize_rows
from ..maps.sphere_maps import SphereMap
from ..workflows.parallel import map_ordered
from .dirichlet import DiscreteMap, FlowReport, interpolate

logger = logging.getLogger(__name__)

MIN_RHO = 0.1
# B(x_R, r_R) must stay this far inside the mesh ball.
INTERIOR_MARGIN = 1.0
RAY_SAMPLES = 8
JACOBIAN_SAMPLES = 16
TRIANGLE_SLACK = 1e-9


@dataclass(frozen=True)
class DiagnosticsRecord:
    rho_R: float
    r_R: float
    skipped: bool
    reason: str = ""
    directions: int = 0
    c: float = float("nan")
    c0: float = float("nan")
    R0: float = float("nan")
    fraction_U: float = float("nan")
    fraction_V: float = float("nan")
    fraction_Q: float = float("nan")
    fraction_VUQ: float = float("nan")
    u_volume_bound: float = float("nan")
    v_volume_bound: float = float("nan")
    radius_condition: bool = False
    angle_bound: float = float("nan")
    measured_max_angle: float = float("nan")
    trig_triangles: int = 0
    trig_violations: int = 0

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)


def _unit_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    return normalize_rows(rng.standard_normal((count, dim)))


def proof_diagnostics(
    mesh_map: DiscreteMap,
    f: SphereMap,
    report: FlowReport,
    directions: int = 10_000,
    c: Optional[float] = None,
    c0: float = 0.5,
    R0: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
    extension: Optional[BarycentricExtension] = None,
    workers: Optional[int] = None,
) -> DiagnosticsRecord:
    """Fractions of unit directions at x_R in U_R, V_R and Q, with the angle bounds they feed.

    r_R = rho_R^(1/3). U_R: rho_h(exp(r_R v)) >= rho_R - r_R / (2c). V_R: rho_h(exp(t v)) >= rho_R / 2
    for sampled t in [0, r_R]. Q: d(F(x_R), F(exp(t v))) >= c0 t - c0 for t in R0 * {1, 2, 4}.
    Here rho_h(z) = d(F(x_R), h_R(z)).
    """
    rho_R = report.rho_R
    if rho_R < MIN_RHO:
        logger.info("rho_R=%.3e below %.1f; diagnostics skipped", rho_R, MIN_RHO)
        return DiagnosticsRecord(rho_R, float("nan"), True, f"rho_R below {MIN_RHO}")
    r_R = rho_R ** (1.0 / 3.0)
    mesh = mesh_map.mesh
    x_R = mesh.vertices[report.argmax_vertex]
    y_R = mesh_map.extension_values[report.argmax_vertex]
    if float(distance_array(np.zeros(mesh.dim), x_R)) + r_R > mesh.radius - INTERIOR_MARGIN:
        return DiagnosticsRecord(rho_R, r_R, True, f"B(x_R, r_R) leaves B(o, R - {INTERIOR_MARGIN:g})")

    rng = rng or np.random.default_rng(0)
    extension = extension or BarycentricExtension(f)
    R0 = r_R if R0 is None else R0
    units = _unit_directions(rng, directions, mesh.dim)

    times = np.linspace(0.0, r_R, RAY_SAMPLES + 1)[1:]
    ray_points = np.stack([exp_ray_array(x_R, units, np.full(directions, t)) for t in times], axis=1)
    h_on_rays = interpolate(mesh_map, ray_points.reshape(-1, mesh.dim)).reshape(ray_points.shape)
    rho_h = distance_array(y_R, h_on_rays)

    def extension_at(point: np.ndarray) -> np.ndarray:
        return extension(HPoint(point)).coords

    far_points = ray_points[:, -1]
    f_far = np.stack(map_ordered(extension_at, far_points, workers))
    q_radii = R0 * np.array([1.0, 2.0, 4.0])
    q_ok = np.ones(directions, dtype=bool)
    for radius in q_radii:
        images = np.stack(map_ordered(extension_at, exp_ray_array(x_R, units, np.full(directions, radius)), workers))
        q_ok &= distance_array(y_R, images) >= c0 * radius - c0

    if c is None:
        samples = [HPoint(x_R)] + [HPoint(p) for p in far_points[:JACOBIAN_SAMPLES]]
        norms = map_ordered(lambda p: extension.jacobian(p).hyperbolic_norm, samples, workers)
        c = max(1.0, float(max(norms)))
    n = f.n
    in_U = rho_h[:, -1] >= rho_R - r_R / (2.0 * c)
    in_V = np.all(rho_h >= rho_R / 2.0, axis=1)
    selected = in_U & in_V & q_ok

    h_center = mesh_map.values[report.argmax_vertex]
    v_h = log_map_array(y_R, h_center)
    measured = float("nan")
    if np.any(selected) and np.linalg.norm(v_h) > 0:
        v_F = log_map_array(np.broadcast_to(y_R, f_far[selected].shape), f_far[selected])
        lengths = np.linalg.norm(v_F, axis=1)
        valid = lengths > 0
        if np.any(valid):
            measured = float(np.max(angle_between(v_F[valid] / lengths[valid, None], v_h / np.linalg.norm(v_h))))

    triangles = in_U & q_ok
    p2, p3 = f_far[triangles], h_on_rays[triangles, -1]
    d12 = distance_array(y_R, p2)
    d13 = distance_array(y_R, p3)
    d23 = distance_array(p2, p3)
    proper = (d12 > 1e-9) & (d13 > 1e-9) & (d23 > 1e-9)
    angles = law_of_cosines_angle(d23[proper], d13[proper], d12[proper])
    bounds = gromov_angle_bound(d23[proper], d13[proper], d12[proper])
    violations = int(np.count_nonzero(angles > bounds + TRIANGLE_SLACK))

    record = DiagnosticsRecord(
        rho_R=rho_R,
        r_R=r_R,
        skipped=False,
        directions=directions,
        c=c,
        c0=c0,
        R0=R0,
        fraction_U=float(in_U.mean()),
        fraction_V=float(in_V.mean()),
        fraction_Q=float(q_ok.mean()),
        fraction_VUQ=float(selected.mean()),
        u_volume_bound=1.0 / (3.0 * c**2),
        v_volume_bound=1.0 - 2.0**12 * (n + 1) * c * r_R**2 / rho_R,
        radius_condition=bool(r_R <= rho_R / (16.0 * c**2 * (n + 1))),
        angle_bound=8.0 * rho_R**2 / math.sinh(rho_R / 4.0) + 4.0 * math.exp(-0.25 * (r_R / (2.0 * c) - c0)),
        measured_max_angle=measured,
        trig_triangles=int(np.count_nonzero(proper)),
        trig_violations=violations,
    )
    if violations:
        logger.warning("%d of %d triangles exceed the Gromov angle bound", violations, record.trig_triangles)
    return record
