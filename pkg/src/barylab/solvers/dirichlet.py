"""Discrete harmonic maps B(o, R) -> H^{n+1} with boundary data F_f, and rho_R."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..barycentric.barycenter import karcher_mean_batch, karcher_mean_coords
from ..barycentric.extension import BarycentricExtension
from ..errors import DirichletConvergenceError, MeshError
from ..geometry.hyperbolic import distance_array, exp_ray_array, log_map_array
from ..geometry.points import HPoint, conformal_factor
from ..maps.sphere_maps import SphereMap
from ..workflows.parallel import map_ordered
from .mesh import BallMesh

logger = logging.getLogger(__name__)

MAX_HALVINGS = 30
INNER_ITERATIONS = 20


@dataclass(frozen=True, eq=False)
class DiscreteMap:
    """Per-vertex values of a map on a BallMesh; ``extension_values`` holds F_f at the vertices."""

    mesh: BallMesh
    values: np.ndarray
    extension_values: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != self.mesh.vertices.shape:
            raise MeshError(f"values of shape {values.shape} do not match the mesh {self.mesh.vertices.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def value(self, index: int) -> HPoint:
        return HPoint(self.values[index])

    def energy(self) -> float:
        return dirichlet_energy(self.mesh, self.values)


@dataclass(frozen=True)
class FlowReport:
    energies: Tuple[float, ...]
    rho_R: float
    iterations: int
    max_update: float
    balance_residual: float
    argmax_vertex: int
    converged: bool
    seconds: float = 0.0


def dirichlet_energy(mesh: BallMesh, values: np.ndarray) -> float:
    """E(h) = 1/2 sum over edges of w_ij d(h_i, h_j)^2."""
    lengths = distance_array(values[mesh.edges[:, 0]], values[mesh.edges[:, 1]])
    return 0.5 * float(mesh.weights @ (lengths * lengths))


def _karcher_steps(mesh: BallMesh, y: np.ndarray, values: np.ndarray) -> np.ndarray:
    """sum_j w_ij log_{y_i}(values_j) / sum_j w_ij for every vertex i."""
    source, target, weights = mesh.directed_edges()
    logs = log_map_array(y[source], values[target])
    totals = np.bincount(source, weights=weights, minlength=mesh.vertex_count)
    sums = np.stack([np.bincount(source, weights=weights * logs[:, d], minlength=mesh.vertex_count) for d in range(mesh.dim)], axis=1)
    return sums / totals[:, None]


def balance_residuals(mesh: BallMesh, values: np.ndarray) -> np.ndarray:
    """Hyperbolic length of the normalized balance vector at each interior vertex."""
    steps = _karcher_steps(mesh, values, values)[mesh.interior]
    return conformal_factor(values[mesh.interior]) * np.linalg.norm(steps, axis=1)


def _neighbor_means(mesh: BallMesh, values: np.ndarray, tol: float) -> np.ndarray:
    """Karcher mean of the neighbors' values for every interior vertex (double-buffered)."""
    interior = mesh.interior
    y = values.copy()
    for _ in range(INNER_ITERATIONS):
        steps = _karcher_steps(mesh, y, values)[interior]
        lengths = conformal_factor(y[interior]) * np.linalg.norm(steps, axis=1)
        moving = lengths > tol
        if not np.any(moving):
            break
        rows = interior[moving]
        y[rows] = exp_ray_array(y[rows], steps[moving], lengths[moving])
    return y


def _geodesic_blend(start: np.ndarray, end: np.ndarray, fraction: float) -> np.ndarray:
    logs = log_map_array(start, end)
    lengths = conformal_factor(start) * np.linalg.norm(logs, axis=1)
    moved = start.copy()
    active = lengths > 0
    moved[active] = exp_ray_array(start[active], logs[active], fraction * lengths[active])
    return moved


def _boundary_mean(mesh: BallMesh, boundary_values: np.ndarray) -> np.ndarray:
    chosen = boundary_values[mesh.boundary]
    return karcher_mean_coords(chosen, np.ones(chosen.shape[0]))


def solve_harmonic(
    mesh: BallMesh,
    boundary_values: np.ndarray,
    initial: Optional[np.ndarray] = None,
    tol: float = 1e-8,
    max_iter: int = 5000,
) -> Tuple[np.ndarray, Dict[str, object]]:
    """Energy-decreasing Karcher-mean flow with fixed boundary values.

    Each sweep moves every interior vertex toward the Karcher mean of its neighbors' previous
    values, halving the move along geodesics until the energy does not increase. Stops when no
    interior vertex is more than ``tol`` from its neighbor mean.
    """
    boundary_values = np.asarray(boundary_values, dtype=float)
    values = np.array(boundary_values if initial is None else initial, dtype=float)
    interior = mesh.interior
    if initial is None:
        values[interior] = _boundary_mean(mesh, boundary_values)
    values[mesh.boundary] = boundary_values[mesh.boundary]

    energy = dirichlet_energy(mesh, values)
    energies: List[float] = [energy]
    max_update = float("inf")
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        targets = _neighbor_means(mesh, values, 0.01 * tol)
        max_update = float(np.max(distance_array(values[interior], targets[interior]), initial=0.0))
        if max_update <= tol:
            converged = True
            iterations -= 1
            break
        fraction = 1.0
        for _ in range(MAX_HALVINGS):
            proposal = values.copy()
            proposal[interior] = _geodesic_blend(values[interior], targets[interior], fraction)
            candidate = dirichlet_energy(mesh, proposal)
            if candidate <= energy:
                break
            fraction *= 0.5
        else:
            logger.debug("no energy decrease left after %d sweeps (max update %.3e)", iterations, max_update)
            break
        values, energy = proposal, candidate
        energies.append(energy)
        if iterations % 500 == 0:
            logger.debug("sweep %d: energy %.12g, max update %.3e", iterations, energy, max_update)
    balance = float(np.max(balance_residuals(mesh, values), initial=0.0))
    converged = converged or balance <= 10.0 * tol
    return values, {
        "energies": tuple(energies),
        "iterations": iterations,
        "max_update": max_update,
        "balance_residual": balance,
        "converged": converged,
    }


def extension_at_vertices(
    extension: BarycentricExtension, mesh: BallMesh, workers: Optional[int] = None
) -> np.ndarray:
    return np.stack(map_ordered(lambda v: extension(HPoint(v)).coords, mesh.vertices, workers))


def _rho(values: np.ndarray, extension_values: np.ndarray) -> Tuple[float, int]:
    gaps = distance_array(values, extension_values)
    index = int(np.argmax(gaps))
    return float(gaps[index]), index


def solve_dirichlet(
    f: SphereMap,
    mesh: BallMesh,
    tol: float = 1e-8,
    max_iter: int = 5000,
    extension: Optional[BarycentricExtension] = None,
    workers: Optional[int] = None,
) -> Tuple[DiscreteMap, FlowReport]:
    """h_R on the mesh with h_R = F_f on S(o, R); the flow starts from F_f itself."""
    if mesh.dim != f.dim:
        raise MeshError(f"mesh of H^{mesh.dim} cannot carry boundary data on S^{f.n}")
    started = time.perf_counter()
    extension = extension or BarycentricExtension(f)
    extension_values = extension_at_vertices(extension, mesh, workers)
    values, flow = solve_harmonic(mesh, extension_values, extension_values, tol, max_iter)
    rho_R, argmax = _rho(values, extension_values)
    report = FlowReport(
        flow["energies"],
        rho_R,
        flow["iterations"],
        flow["max_update"],
        flow["balance_residual"],
        argmax,
        flow["converged"],
        time.perf_counter() - started,
    )
    mesh_map = DiscreteMap(mesh, values, extension_values)
    if not report.converged:
        raise DirichletConvergenceError(
            f"harmonic flow on B(o, {mesh.radius}) stopped after {report.iterations} sweeps", mesh_map, report
        )
    logger.info(
        "Dirichlet solve R=%.3g: %d sweeps, rho_R=%.6g, balance %.2e in %.2fs",
        mesh.radius,
        report.iterations,
        rho_R,
        report.balance_residual,
        report.seconds,
    )
    return mesh_map, report


def rho(mesh_map: DiscreteMap, f: Optional[SphereMap] = None, workers: Optional[int] = None) -> float:
    """max over vertices of d(F_f(v), h_R(v))."""
    extension_values = mesh_map.extension_values
    if extension_values is None:
        if f is None:
            raise MeshError("rho needs the boundary map when the extension values are not stored")
        extension_values = extension_at_vertices(BarycentricExtension(f), mesh_map.mesh, workers)
    return _rho(mesh_map.values, extension_values)[0]


def interpolate(mesh_map: DiscreteMap, points: np.ndarray) -> np.ndarray:
    """h_R off the vertices: Karcher mean of the containing simplex's values with barycentric weights."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    simplex, coords = mesh_map.mesh.locate(points)
    if np.any(simplex < 0):
        raise MeshError(f"{int(np.count_nonzero(simplex < 0))} points lie outside the mesh")
    weights = np.clip(coords, 0.0, None)
    corners = mesh_map.mesh.simplices[simplex]
    return karcher_mean_batch(mesh_map.values[corners], weights)


def dump_mesh_rows(mesh_map: DiscreteMap) -> List[Dict[str, object]]:
    """One row per vertex: id, coordinates, boundary flag, solution and extension coordinates."""
    mesh = mesh_map.mesh
    rows = []
    for index in range(mesh.vertex_count):
        row: Dict[str, object] = {"vertex": index, "boundary": int(mesh.boundary[index])}
        for axis in range(mesh.dim):
            row[f"x{axis}"] = float(mesh.vertices[index, axis])
        for axis in range(mesh.dim):
            row[f"h{axis}"] = float(mesh_map.values[index, axis])
        if mesh_map.extension_values is not None:
            for axis in range(mesh.dim):
                row[f"F{axis}"] = float(mesh_map.extension_values[index, axis])
        rows.append(row)
    return rows
