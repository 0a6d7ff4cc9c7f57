"""The barycentric extension F_f(x) = BCG(f_*(vol_x)) and its derivatives."""
from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import ConvergenceError, GeometryError, MeasureError
from ..geometry.hyperbolic import busemann_euclidean_gradient, dist, exp_ray, log_map
from ..geometry.isometry import MobiusIsometry
from ..geometry.points import HPoint, conformal_factor
from ..maps.sphere_maps import SphereMap, compose, make_mobius_trace
from .barycenter import BarycenterResult, barycenter
from .measures import DiscreteMeasure, quadrature, visual_weights

logger = logging.getLogger(__name__)

DEFAULT_QUADRATURE = {1: 2048, 2: 4096}
MAX_QUADRATURE = 2**18
SECOND_DIFFERENCE_STEP = 1e-2
NORMALIZE_TOLERANCE = 1e-7


@dataclass(frozen=True)
class ExtensionJacobian:
    """DF_f at ``x`` as an ambient matrix, with its operator norm in the hyperbolic metric."""

    matrix: np.ndarray
    hyperbolic_norm: float
    min_eigenvalue: float


@dataclass(frozen=True)
class ExtensionEvaluation:
    input: HPoint
    value: HPoint
    quadrature_size: int
    gradient_norm: float
    refinement: Optional[float] = None
    jacobian: Optional[ExtensionJacobian] = None


def quadrature_size_for(x: HPoint, base_size: int) -> int:
    """Node count resolving the visual-density peak at ``x``, whose width is about 1 - |x|."""
    gap = max(1.0 - x.norm, 1e-12)
    if x.n == 1:
        wanted = max(base_size, math.ceil(32.0 / gap))
    else:
        wanted = max(base_size, math.ceil(16.0 * math.pi / gap**2))
    if wanted > MAX_QUADRATURE:
        logger.warning("quadrature size %d at |x|=%.6f capped at %d", wanted, x.norm, MAX_QUADRATURE)
        return MAX_QUADRATURE
    return int(wanted)


def _annotated(exc: Exception, x: HPoint) -> Exception:
    where = f"extension at x={np.array2string(x.coords, precision=6)}"
    if isinstance(exc, ConvergenceError):
        return ConvergenceError(f"{where}: {exc.message}", exc.last_iterate, exc.residual)
    return MeasureError(f"{where}: {exc}")


class BarycentricExtension:
    """Evaluates F_f at interior points, reusing the node images f(theta_k) across points.

    The images of the quadrature nodes do not depend on x; only the visual weights do.
    """

    def __init__(
        self,
        f: SphereMap,
        quadrature_size: Optional[int] = None,
        exponent: Optional[float] = None,
        tol: float = 1e-9,
        max_iter: int = 100,
        adaptive: bool = True,
    ) -> None:
        self.f = f
        self.quadrature_size = quadrature_size or DEFAULT_QUADRATURE[f.n]
        self.exponent = exponent
        self.tol = tol
        self.max_iter = max_iter
        self.adaptive = adaptive
        self._cache: Dict[int, Tuple[DiscreteMeasure, np.ndarray]] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def density_exponent(self) -> float:
        return float(self.n if self.exponent is None else self.exponent)

    def size_at(self, x: HPoint) -> int:
        return quadrature_size_for(x, self.quadrature_size) if self.adaptive else self.quadrature_size

    def _nodes(self, count: int) -> Tuple[DiscreteMeasure, np.ndarray]:
        with self._lock:
            cached = self._cache.get(count)
        if cached is None:
            base = quadrature(self.n, count)
            cached = (base, self.f.evaluate_array(base.nodes))
            with self._lock:
                self._cache[count] = cached
        return cached

    def measure_at(self, x: HPoint, count: Optional[int] = None) -> DiscreteMeasure:
        """f_*(vol_x) in the quadrature representation."""
        if x.dim != self.f.dim:
            raise GeometryError(f"point of dimension {x.dim} for a map on S^{self.n}")
        base, images = self._nodes(count or self.size_at(x))
        return DiscreteMeasure(images, visual_weights(base.nodes, base.weights, x, self.density_exponent))

    def solve(self, x: HPoint, count: Optional[int] = None, initial: Optional[HPoint] = None) -> BarycenterResult:
        try:
            return barycenter(self.measure_at(x, count), self.tol, self.max_iter, initial=initial)
        except (ConvergenceError, MeasureError) as exc:
            raise _annotated(exc, x) from exc

    def __call__(self, x: HPoint) -> HPoint:
        return self.solve(x).point

    def evaluate(self, x: HPoint, refine: bool = False, with_jacobian: bool = False) -> ExtensionEvaluation:
        count = self.size_at(x)
        result = self.solve(x, count)
        refinement = None
        if refine:
            finer = self.solve(x, 4 * count, initial=result.point)
            refinement = dist(result.point, finer.point)
        jacobian = self.jacobian(x, result.point, count) if with_jacobian else None
        return ExtensionEvaluation(x, result.point, count, result.gradient_norm, refinement, jacobian)

    def jacobian(self, x: HPoint, value: Optional[HPoint] = None, count: Optional[int] = None) -> ExtensionJacobian:
        """Implicit differentiation of sum_k p_k(x) grad B_o(y, f(theta_k)) = 0 at y = F_f(x).

        Only the visual weights p_k depend on x; their derivative is closed form in grad B_o(x, theta_k).
        """
        count = count or self.size_at(x)
        y = (value or self.solve(x, count).point).coords
        base, images = self._nodes(count)
        p = visual_weights(base.nodes, base.weights, x, self.density_exponent)
        diff = y - images
        gap2 = np.sum(diff * diff, axis=1)
        interior = 1.0 - float(y @ y)
        identity = np.eye(y.size)
        d_y = (
            2.0 * identity * float(p @ (1.0 / gap2))
            - 4.0 * np.einsum("k,ki,kj->ij", p / gap2**2, diff, diff)
            + 2.0 * identity / interior
            + 4.0 * np.outer(y, y) / interior**2
        )
        # the centering term of d p_k / dx drops out because sum_k p_k grad B_o(y, .) vanishes at y
        d_x = -self.density_exponent * np.einsum(
            "k,ki,kj->ij", p, busemann_euclidean_gradient(y, images), busemann_euclidean_gradient(x.coords, base.nodes)
        )
        eigenvalues = np.linalg.eigvalsh(0.5 * (d_y + d_y.T))
        if eigenvalues[0] <= 1e-12 * max(1.0, abs(eigenvalues[-1])):
            raise GeometryError(f"singular d G / dy at the barycenter (min eigenvalue {eigenvalues[0]:.3e})")
        matrix = -np.linalg.solve(d_y, d_x)
        scale = float(conformal_factor(y) / conformal_factor(x.coords))
        return ExtensionJacobian(matrix, scale * float(np.linalg.norm(matrix, 2)), float(eigenvalues[0]))

    def second_derivative_norm(self, x: HPoint, h: float = SECOND_DIFFERENCE_STEP) -> float:
        """max_ij |D^2 F_f(e_i, e_j)| in the hyperbolic metric, from geodesic second differences."""
        count = self.size_at(x)
        center = self.solve(x, count).point
        solver = BarycentricExtension(self.f, count, self.exponent, tol=min(self.tol, 1e-12), max_iter=self.max_iter, adaptive=False)
        solver._cache = self._cache

        def second_difference(direction: np.ndarray) -> np.ndarray:
            forward = solver.solve(exp_ray(x, direction, h), initial=center).point
            backward = solver.solve(exp_ray(x, -direction, h), initial=center).point
            return (log_map(center, forward) + log_map(center, backward)) / h**2

        basis = np.eye(x.dim)
        largest = 0.0
        for i in range(x.dim):
            largest = max(largest, float(np.linalg.norm(second_difference(basis[i]))))
            for j in range(i + 1, x.dim):
                plus = second_difference((basis[i] + basis[j]) / math.sqrt(2.0))
                minus = second_difference((basis[i] - basis[j]) / math.sqrt(2.0))
                largest = max(largest, float(np.linalg.norm((plus - minus) / 2.0)))
        return float(conformal_factor(center.coords)) * largest


def extend(
    f: SphereMap,
    x: HPoint,
    quadrature_size: Optional[int] = None,
    exponent: Optional[float] = None,
    refine: bool = True,
    with_jacobian: bool = False,
    tol: float = 1e-9,
) -> ExtensionEvaluation:
    """F_f(x), with the N versus 4N refinement estimate when ``refine`` is set."""
    return BarycentricExtension(f, quadrature_size, exponent, tol=tol).evaluate(x, refine, with_jacobian)


def extension_jacobian(
    f: SphereMap, x: HPoint, quadrature_size: Optional[int] = None, exponent: Optional[float] = None
) -> ExtensionJacobian:
    return BarycentricExtension(f, quadrature_size, exponent, tol=1e-12).jacobian(x)


def second_derivative_norm(
    f: SphereMap, x: HPoint, quadrature_size: Optional[int] = None, exponent: Optional[float] = None
) -> float:
    return BarycentricExtension(f, quadrature_size, exponent, tol=1e-12).second_derivative_norm(x)


def normalize(f: SphereMap, quadrature_size: Optional[int] = None) -> Tuple[SphereMap, MobiusIsometry]:
    """Post-compose f with the transvection h taking F_f(o) to o; returns (h o f, h)."""
    origin = HPoint.origin(f.dim)
    extension = BarycentricExtension(f, quadrature_size, tol=1e-11)
    center = extension(origin)
    h = MobiusIsometry.transvection(HPoint(-center.coords))
    balanced = compose([make_mobius_trace(h, label="normalize"), f])
    check = BarycentricExtension(balanced, quadrature_size, tol=1e-11)(origin)
    if check.norm > NORMALIZE_TOLERANCE:
        raise ConvergenceError("normalized map is not balanced at o", check.coords, check.norm)
    return balanced, h
