"""Geodesic-polar meshes of hyperbolic balls B(o, R) with Delaunay edges and edge weights."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import Delaunay

from ..errors import MeshError
from ..geometry.hyperbolic import distance_array, log_map_array
from ..geometry.isometry import plane_rotation
from ..geometry.points import conformal_factor
from ..geometry.quadrature import GOLDEN_ANGLE, fibonacci_nodes

logger = logging.getLogger(__name__)

RADIUS_RANGE = (0.5, 8.0)
SPACING_RANGE = (0.01, 0.5)
EDGE_WEIGHTINGS = ("cotangent", "uniform")
MAX_VERTICES = 500_000
WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class BallMesh:
    """Vertices of B(o, R) in ball coordinates, with each undirected edge listed once."""

    vertices: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    boundary: np.ndarray
    simplices: np.ndarray
    radius: float
    spacing: float
    weighting: str = "cotangent"
    triangulation: Delaunay = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return int(self.vertices.shape[1])

    @property
    def vertex_count(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    def edge_lengths(self) -> np.ndarray:
        return distance_array(self.vertices[self.edges[:, 0]], self.vertices[self.edges[:, 1]])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.vertex_count)

    def directed_edges(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(source, target, weight), each undirected edge in both directions."""
        source = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        target = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        return source, target, np.concatenate([self.weights, self.weights])

    def locate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Containing simplex and its barycentric coordinates in the ball chart; -1 outside the mesh."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        simplex = self.triangulation.find_simplex(points)
        transform = self.triangulation.transform[simplex]
        partial = np.einsum("pij,pj->pi", transform[:, : self.dim], points - transform[:, self.dim])
        coords = np.hstack([partial, 1.0 - partial.sum(axis=1, keepdims=True)])
        return simplex, coords


def _check_parameters(radius: float, spacing: float, dim: int, weighting: str) -> None:
    if not RADIUS_RANGE[0] <= radius <= RADIUS_RANGE[1]:
        raise MeshError(f"mesh radius {radius} outside [{RADIUS_RANGE[0]}, {RADIUS_RANGE[1]}]")
    if not SPACING_RANGE[0] <= spacing <= SPACING_RANGE[1]:
        raise MeshError(f"mesh spacing {spacing} outside [{SPACING_RANGE[0]}, {SPACING_RANGE[1]}]")
    if dim not in (2, 3):
        raise MeshError(f"meshes cover H^2 or H^3, got dimension {dim}")
    if weighting not in EDGE_WEIGHTINGS:
        raise MeshError(f"unknown edge weighting {weighting!r} (expected one of {', '.join(EDGE_WEIGHTINGS)})")


def _ring_sizes(radii: np.ndarray, spacing: float, dim: int) -> np.ndarray:
    if dim == 2:
        return np.maximum(6, np.ceil(2.0 * np.pi * np.sinh(radii) / spacing)).astype(int)
    cell = math.sqrt(3.0) / 2.0 * spacing**2
    return np.maximum(12, np.ceil(4.0 * np.pi * np.sinh(radii) ** 2 / cell)).astype(int)


def _ring(index: int, size: int, dim: int) -> np.ndarray:
    """Unit directions of one ring, rotated by a golden-angle offset against the previous ring."""
    if dim == 2:
        angles = 2.0 * np.pi * np.arange(size) / size + index * GOLDEN_ANGLE
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    rotation = np.eye(3)
    rotation[:2, :2] = plane_rotation(2, index * GOLDEN_ANGLE)
    return fibonacci_nodes(size) @ rotation.T


def _cotangent_terms(chart: np.ndarray, opposite: int, first: int, second: int) -> np.ndarray:
    """cot of the angle at ``opposite`` in each chart triangle (or the dihedral cot in a tetrahedron)."""
    a = chart[:, first] - chart[:, opposite]
    b = chart[:, second] - chart[:, opposite]
    dot = np.sum(a * b, axis=1)
    if chart.shape[2] == 2:
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    else:
        cross = np.linalg.norm(np.cross(a, b), axis=1)
    return np.divide(dot, cross, out=np.zeros_like(dot), where=cross > 1e-14)


def _simplex_charts(vertices: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    """Simplex vertices in the scaled log chart at the simplex's coordinate centroid."""
    corners = vertices[simplices]
    center = corners.mean(axis=1, keepdims=True)
    return conformal_factor(center)[..., None] * log_map_array(center, corners)


def _cotangent_weights(vertices: np.ndarray, simplices: np.ndarray, edge_keys: np.ndarray) -> np.ndarray:
    charts = _simplex_charts(vertices, simplices)
    count = vertices.shape[0]
    keys, values = [], []
    size = simplices.shape[1]
    for i, j in combinations(range(size), 2):
        rest = [k for k in range(size) if k not in (i, j)]
        key = np.minimum(simplices[:, i], simplices[:, j]) * count + np.maximum(simplices[:, i], simplices[:, j])
        if size == 3:
            value = 0.5 * _cotangent_terms(charts, rest[0], i, j)
        else:
            # edge ij is weighted by the dihedral angle along the opposite edge kl
            k, l = rest
            hinge = charts[:, l] - charts[:, k]
            length = np.linalg.norm(hinge, axis=1, keepdims=True)
            unit = hinge / length
            flat = charts - np.einsum("sd,svd->sv", unit, charts - charts[:, k : k + 1])[..., None] * unit[:, None, :]
            value = length[:, 0] * _cotangent_terms(flat, k, i, j) / 6.0
        keys.append(key)
        values.append(value)
    totals = np.bincount(
        np.searchsorted(edge_keys, np.concatenate(keys)), weights=np.concatenate(values), minlength=edge_keys.size
    )
    positive = totals[totals > 0]
    floor = WEIGHT_FLOOR * (float(np.median(positive)) if positive.size else 1.0)
    clamped = int(np.count_nonzero(totals < floor))
    if clamped:
        logger.debug("clamped %d of %d cotangent weights to %.3e", clamped, totals.size, floor)
    return np.maximum(totals, floor)


def build_mesh(radius: float, spacing: float, dim: int = 2, weighting: str = "cotangent") -> BallMesh:
    """Geodesic-polar grid of B(o, R): rings at radial step <= spacing, angular spacing <= spacing."""
    _check_parameters(radius, spacing, dim, weighting)
    rings = math.ceil(radius / spacing - 1e-9)
    radii = radius * np.arange(1, rings + 1) / rings
    sizes = _ring_sizes(radii, spacing, dim)
    total = 1 + int(sizes.sum())
    if total > MAX_VERTICES:
        raise MeshError(f"mesh of B(o, {radius}) at spacing {spacing} needs {total} vertices (limit {MAX_VERTICES})")
    blocks = [np.zeros((1, dim))]
    for index, (r, size) in enumerate(zip(radii, sizes), start=1):
        blocks.append(np.tanh(r / 2.0) * _ring(index, int(size), dim))
    vertices = np.vstack(blocks)
    boundary = np.zeros(total, dtype=bool)
    boundary[total - int(sizes[-1]) :] = True

    triangulation = Delaunay(vertices)
    simplices = triangulation.simplices
    pairs = np.vstack([np.sort(simplices[:, [i, j]], axis=1) for i, j in combinations(range(dim + 1), 2)])
    edge_keys = np.unique(pairs[:, 0] * total + pairs[:, 1])
    edges = np.stack([edge_keys // total, edge_keys % total], axis=1)
    if weighting == "uniform":
        weights = np.ones(edges.shape[0])
    else:
        weights = _cotangent_weights(vertices, simplices, edge_keys)

    adjacency = coo_matrix((np.ones(edges.shape[0]), (edges[:, 0], edges[:, 1])), shape=(total, total))
    components, _ = connected_components(adjacency, directed=False)
    if components != 1:
        raise MeshError(f"mesh graph has {components} components")
    mesh = BallMesh(vertices, edges, weights, boundary, simplices, radius, spacing, weighting, triangulation)
    if np.any(mesh.degrees()[mesh.interior] < 2):
        raise MeshError("an interior vertex has fewer than two neighbors")
    logger.info(
        "built %s mesh of B(o, %.3g): %d vertices, %d edges, %d rings", weighting, radius, total, edges.shape[0], rings
    )
    return mesh
