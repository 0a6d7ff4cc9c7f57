"""Busemann barycenters of boundary measures and Karcher means of interior points."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..errors import ConvergenceError, MeasureError
from ..geometry.hyperbolic import (
    busemann_array,
    busemann_euclidean_gradient,
    distance_array,
    exp_ray_array,
    log_map_array,
)
from ..geometry.points import BOUNDARY_FLOOR, HPoint, conformal_factor
from .measures import DiscreteMeasure

logger = logging.getLogger(__name__)

CONCENTRATION_LIMIT = 1.0 - 1e-6
# Longest hyperbolic Newton step; keeps early iterates well inside the ball.
MAX_STEP = 4.0
# Karcher steps shorter than this may fail to lower the energy in floating point.
STALL_FLOOR = 1e-6


@dataclass(frozen=True)
class FunctionalValue:
    """B_mu at y: value, Riemannian gradient (ambient) and Hessian (ambient bilinear form)."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


@dataclass(frozen=True)
class BarycenterResult:
    point: HPoint
    gradient_norm: float
    iterations: int
    hessian_min_eig: float
    value: float


@dataclass
class BacktrackingLineSearch:
    """Armijo backtracking along geodesics."""

    contraction_factor: float = 0.5
    sufficient_decrease: float = 1e-4
    max_iterations: int = 30


def busemann_functional(measure: DiscreteMeasure, y: HPoint) -> FunctionalValue:
    """B_mu(y) = sum w_i B_o(y, theta_i) with its gradient -sum w_i n_theta_i(y) and Hessian."""
    grads = busemann_euclidean_gradient(y.coords, measure.nodes)
    factor = float(conformal_factor(y.coords))
    value = float(measure.weights @ busemann_array(y.coords, measure.nodes))
    gradient = (measure.weights @ grads) / factor**2
    hessian = factor**2 * np.eye(y.dim) - np.einsum("k,ki,kj->ij", measure.weights, grads, grads)
    return FunctionalValue(value, gradient, hessian)


def _frame_terms(nodes: np.ndarray, weights: np.ndarray, y: np.ndarray):
    """Value, gradient and Hessian of B_mu in the orthonormal frame e_i / lambda(y)."""
    factor = float(conformal_factor(y))
    units = -busemann_euclidean_gradient(y, nodes) / factor
    gradient = -(weights @ units)
    hessian = np.eye(y.size) - np.einsum("k,ki,kj->ij", weights, units, units)
    value = float(weights @ busemann_array(y, nodes))
    return value, gradient, hessian


def barycenter(
    measure: DiscreteMeasure,
    tol: float = 1e-9,
    max_iter: int = 100,
    initial: Optional[HPoint] = None,
    line_search: Optional[BacktrackingLineSearch] = None,
) -> BarycenterResult:
    """BCG(mu): the minimizer of B_mu, by damped Riemannian Newton iteration.

    Newton directions are computed in an orthonormal frame and followed along geodesics with
    Armijo step halving. Close to the minimum, where values stop resolving, a step is also
    accepted when it reduces the gradient norm.
    """
    if measure.weights.max() >= CONCENTRATION_LIMIT:
        raise MeasureError("measure too concentrated: a single node carries almost all mass")
    search = line_search or BacktrackingLineSearch()
    nodes, weights = measure.nodes, measure.weights
    y = 0.5 * (weights @ nodes) if initial is None else initial.coords.copy()
    value, gradient, hessian = _frame_terms(nodes, weights, y)
    grad_norm = float(np.linalg.norm(gradient))
    for iteration in range(max_iter + 1):
        if grad_norm <= tol:
            eigenvalues = np.linalg.eigvalsh(hessian)
            logger.debug("barycenter converged in %d iterations, |grad|=%.3e", iteration, grad_norm)
            return BarycenterResult(HPoint(y), grad_norm, iteration, float(eigenvalues[0]), value)
        if iteration == max_iter:
            break
        try:
            direction = -np.linalg.solve(hessian, gradient)
        except np.linalg.LinAlgError:
            direction = -gradient
        slope = float(gradient @ direction)
        if slope >= 0:
            direction, slope = -gradient, -grad_norm**2
        length = float(np.linalg.norm(direction))
        step = min(1.0, MAX_STEP / length)
        accepted = False
        for _ in range(search.max_iterations):
            candidate = exp_ray_array(y, direction, step * length)
            if float(candidate @ candidate) < (1.0 - BOUNDARY_FLOOR) ** 2:
                new_value, new_gradient, new_hessian = _frame_terms(nodes, weights, candidate)
                new_norm = float(np.linalg.norm(new_gradient))
                sufficient = new_value <= value + search.sufficient_decrease * step * slope
                stalled = new_value <= value + 1e-14 * max(1.0, abs(value)) and new_norm < grad_norm
                if sufficient or stalled:
                    accepted = True
                    break
            step *= search.contraction_factor
        if not accepted:
            break
        y, value, gradient, hessian, grad_norm = candidate, new_value, new_gradient, new_hessian, new_norm
    raise ConvergenceError("barycenter did not converge", last_iterate=y, residual=grad_norm)


def _as_coords(points: Union[Sequence[HPoint], np.ndarray]) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return np.atleast_2d(points)
    return np.stack([p.coords for p in points])


def karcher_mean_coords(
    points: np.ndarray,
    weights: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 200,
    initial: Optional[np.ndarray] = None,
    halvings: int = 30,
) -> np.ndarray:
    """Weighted Karcher mean of rows of ball coordinates by Riemannian gradient steps.

    Each step is halved at most ``halvings`` times. Running out of halvings ends the iteration
    when the step is already below STALL_FLOOR and raises ConvergenceError otherwise.
    """
    weights = np.asarray(weights, dtype=float)
    weights = weights / weights.sum()
    y = points[int(np.argmax(weights))].copy() if initial is None else np.array(initial, dtype=float)
    if points.shape[0] == 1:
        return points[0].copy()

    def energy(center: np.ndarray) -> float:
        return float(weights @ distance_array(center, points) ** 2)

    current = energy(y)
    length = float("inf")
    for _ in range(max_iter):
        step = weights @ log_map_array(np.broadcast_to(y, points.shape), points)
        length = float(conformal_factor(y)) * float(np.linalg.norm(step))
        if length <= tol:
            return y
        scale = 1.0
        for _ in range(halvings + 1):
            candidate = exp_ray_array(y, step, scale * length)
            candidate_energy = energy(candidate)
            if candidate_energy < current:
                break
            scale *= 0.5
        else:
            if length <= STALL_FLOOR:
                # energy differences are below rounding
                return y
            raise ConvergenceError("Karcher mean stalled without a descent step", last_iterate=y, residual=length)
        y, current = candidate, candidate_energy
    raise ConvergenceError("Karcher mean did not converge", last_iterate=y, residual=length)


def karcher_mean(points: Sequence[HPoint], weights: Optional[Sequence[float]] = None, tol: float = 1e-12) -> HPoint:
    """Minimizer of sum w_i d(y, p_i)^2."""
    coords = _as_coords(points)
    if coords.shape[0] == 0:
        raise MeasureError("Karcher mean of an empty point set")
    w = np.full(coords.shape[0], 1.0 / coords.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if w.shape[0] != coords.shape[0] or np.any(w < 0) or w.sum() <= 0:
        raise MeasureError("Karcher weights must be nonnegative, match the points and have mass")
    return HPoint(karcher_mean_coords(coords, w, tol))


def karcher_mean_batch(
    points: np.ndarray,
    weights: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 100,
    initial: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Karcher means of many small weighted point sets at once.

    ``points`` has shape (P, k, dim) and ``weights`` (P, k); full Riemannian gradient steps,
    which converge quickly for the small, well-clustered sets of a mesh simplex.
    """
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    weights = weights / weights.sum(axis=1, keepdims=True)
    rows = np.arange(points.shape[0])
    y = points[rows, np.argmax(weights, axis=1)].copy() if initial is None else np.array(initial, dtype=float)
    length = np.zeros(points.shape[0])
    for _ in range(max_iter):
        step = np.einsum("pk,pkd->pd", weights, log_map_array(y[:, None, :], points))
        length = conformal_factor(y) * np.linalg.norm(step, axis=1)
        active = length > tol
        if not np.any(active):
            return y
        y[active] = exp_ray_array(y[active], step[active], length[active])
    raise ConvergenceError("batched Karcher means did not converge", last_iterate=y, residual=float(length.max()))
