from __future__ import annotations

import numpy as np
import pytest

from barylab.barycentric import (
    BarycentricExtension,
    DiscreteMeasure,
    barycenter,
    busemann_functional,
    extend,
    extension_jacobian,
    karcher_mean,
    karcher_mean_coords,
    normalize,
    pushforward,
    quadrature,
    quadrature_size_for,
    reweight_visual,
    second_derivative_norm,
    transport,
)
from barylab.errors import ConvergenceError, MeasureError
from barylab.geometry import (
    BPoint,
    Dome,
    HPoint,
    MobiusIsometry,
    RoundBall,
    angle_between,
    conformal_factor,
    dist,
    dome_distance,
    exp_ray,
    log_map,
    plane_rotation,
    tangent_norm,
    visual_cap_mass,
)
from barylab.maps import compose, make_mobius_trace, make_power_map, parse_map_spec


def _random_point(rng: np.random.Generator, dim: int, max_norm: float = 0.6) -> HPoint:
    direction = rng.standard_normal(dim)
    return HPoint(direction / np.linalg.norm(direction) * rng.uniform(0.0, max_norm))


def _assert_close_points(a: HPoint, b: HPoint, tolerance: float, what: str) -> None:
    gap = dist(a, b)
    assert gap <= tolerance, f"{what}: points {a} and {b} are {gap:.3e} apart"


def test_quadrature_nodes_and_moments() -> None:
    four = quadrature(1, 4)
    assert np.allclose(four.nodes, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    assert np.allclose(four.weights, 0.25)
    assert np.linalg.norm(quadrature(1, 100).first_moment()) < 1e-12
    assert np.linalg.norm(quadrature(2, 1000).first_moment()) < 1e-2

    sphere = quadrature(2, 4096)
    assert sphere.integrate(lambda nodes: nodes[:, 0] ** 2) == pytest.approx(1.0 / 3.0, abs=1e-3)
    assert sphere.weights.sum() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(MeasureError):
        quadrature(1, 3)
    with pytest.raises(MeasureError):
        quadrature(2, 8)


def test_measure_validation() -> None:
    nodes = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(MeasureError):
        DiscreteMeasure(nodes, [0.5, 0.6])
    with pytest.raises(MeasureError):
        DiscreteMeasure(nodes, [1.5, -0.5])
    with pytest.raises(MeasureError):
        DiscreteMeasure(nodes[:1], [1.0])
    assert DiscreteMeasure.normalized(nodes, [2.0, 6.0]).weights[1] == pytest.approx(0.75)


def test_pushforward_keeps_weights_and_uniformity() -> None:
    measure = quadrature(1, 64)
    identity = pushforward(parse_map_spec("power:1", 1), measure)
    assert np.allclose(identity.nodes, measure.nodes, atol=1e-14)

    rotation = MobiusIsometry.pure_rotation(plane_rotation(2, 0.4))
    rotated = pushforward(make_mobius_trace(rotation), measure)
    assert np.allclose(rotated.nodes, measure.nodes @ rotation.rotation.T, atol=1e-14)
    assert np.array_equal(rotated.weights, measure.weights)

    doubled = pushforward(make_power_map(2, 1), measure)
    angles = np.arctan2(doubled.nodes[:, 1], doubled.nodes[:, 0])
    for mode in range(1, 5):
        assert abs(doubled.weights @ np.cos(mode * angles)) <= 1e-3
        assert abs(doubled.weights @ np.sin(mode * angles)) <= 1e-3


def test_visual_reweighting() -> None:
    measure = quadrature(2, 1024)
    origin = HPoint.origin(3)
    assert np.allclose(reweight_visual(measure, origin).weights, measure.weights, atol=1e-15)

    target = BPoint([0.0, 0.6, 0.8])
    x = exp_ray(origin, target.dir, 3.0)
    dense = reweight_visual(quadrature(2, 16384), x)
    cap = RoundBall(target, 0.5)
    mass = dense.mass_where(angle_between(dense.nodes, target.dir) <= 0.5)
    assert mass >= 0.9, f"visual measure from distance 3 puts only {mass:.3f} on the cap"
    assert mass == pytest.approx(visual_cap_mass(x, cap), abs=0.02)

    y = HPoint([0.2, -0.3, 0.1])
    there = reweight_visual(measure, y)
    back = reweight_visual(there, origin, base=y)
    assert np.allclose(back.weights, measure.weights, atol=1e-8)


def test_transport_moves_nodes_only() -> None:
    measure = quadrature(1, 32)
    g = MobiusIsometry.random(2, np.random.default_rng(0), max_radius=1.0)
    moved = transport(g, measure)
    assert np.allclose(np.linalg.norm(moved.nodes, axis=1), 1.0)
    assert np.array_equal(moved.weights, measure.weights)


def test_busemann_functional_derivatives() -> None:
    measure = quadrature(2, 512)
    at_origin = busemann_functional(measure, HPoint.origin(3))
    assert at_origin.value == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(at_origin.gradient) < 1e-2

    skewed = reweight_visual(measure, HPoint([0.3, 0.1, -0.2]))
    y = HPoint([-0.1, 0.25, 0.2])
    functional = busemann_functional(skewed, y)
    step = 1e-6
    numeric = np.array(
        [
            (busemann_functional(skewed, HPoint(y.coords + step * e)).value
             - busemann_functional(skewed, HPoint(y.coords - step * e)).value) / (2 * step)
            for e in np.eye(3)
        ]
    )
    factor = float(conformal_factor(y.coords))
    assert np.max(np.abs(numeric - factor**2 * functional.gradient)) <= 1e-6

    assert np.allclose(functional.hessian, functional.hessian.T)
    assert np.min(np.linalg.eigvalsh(functional.hessian)) >= -1e-12
    h = 1e-4
    for u in np.eye(3):
        second = (
            busemann_functional(skewed, exp_ray(y, u, h)).value
            - 2 * functional.value
            + busemann_functional(skewed, exp_ray(y, -u, h)).value
        ) / h**2
        unit = u / factor
        assert second == pytest.approx(unit @ functional.hessian @ unit, abs=1e-4)


def test_barycenter_of_uniform_measure_is_origin() -> None:
    result = barycenter(quadrature(1, 64))
    assert result.point.norm <= 1e-8
    assert result.hessian_min_eig > 0


def test_barycenter_is_stationary_and_equivariant() -> None:
    rng = np.random.default_rng(1)
    for dim, count in ((2, 256), (3, 256)):
        measure = reweight_visual(quadrature(dim - 1, count), HPoint(np.full(dim, 0.2)))
        result = barycenter(measure)
        gradient = busemann_functional(measure, result.point).gradient
        assert tangent_norm(result.point, gradient) <= 2e-9
        assert result.hessian_min_eig > 0
        for _ in range(20):
            g = MobiusIsometry.random(dim, rng, max_radius=2.0)
            moved = barycenter(transport(g, measure))
            _assert_close_points(moved.point, g.apply(result.point), 1e-6, "barycenter equivariance")


def test_gravity_for_two_cluster_measure() -> None:
    nodes = quadrature(1, 2048).nodes
    heavy, light = BPoint.from_angle(0.5), BPoint.from_angle(0.5 + np.pi)
    in_heavy = angle_between(nodes, heavy.dir) < 0.3
    in_light = angle_between(nodes, light.dir) < 0.3
    weights = 0.7 * in_heavy / in_heavy.sum() + 0.3 * in_light / in_light.sum()
    result = barycenter(DiscreteMeasure(nodes, weights))
    gap = dome_distance(Dome(RoundBall(heavy, 0.3)), result.point)
    assert gap < 1.0, f"barycenter is {gap:.3f} from the heavy dome"


def test_barycenter_errors() -> None:
    nodes = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(MeasureError, match="too concentrated"):
        barycenter(DiscreteMeasure(nodes, [1.0 - 1e-7, 1e-7]))
    measure = reweight_visual(quadrature(1, 64), HPoint([0.5, 0.2]))
    with pytest.raises(ConvergenceError) as info:
        barycenter(measure, max_iter=0)
    assert info.value.last_iterate is not None
    assert info.value.residual > 0


def test_karcher_mean() -> None:
    p = HPoint([0.3, -0.2])
    assert np.allclose(karcher_mean([p]).coords, p.coords)

    q = HPoint([-0.5, 0.4])
    midpoint = exp_ray(p, log_map(p, q), dist(p, q) / 2)
    _assert_close_points(karcher_mean([p, q]), midpoint, 1e-9, "midpoint")

    rng = np.random.default_rng(2)
    for dim in (2, 3):
        cloud = [_random_point(rng, dim, 0.5) for _ in range(7)]
        weights = rng.uniform(0.5, 1.5, size=7)
        mean = karcher_mean(cloud, weights)
        g = MobiusIsometry.random(dim, rng, max_radius=1.5)
        moved = karcher_mean([g.apply(c) for c in cloud], weights)
        _assert_close_points(moved, g.apply(mean), 1e-8, "Karcher equivariance")
    with pytest.raises(MeasureError):
        karcher_mean([p, q], [1.0, -1.0])


def test_karcher_mean_raises_when_descent_stalls() -> None:
    o = HPoint.origin(2)
    points = np.stack(
        [exp_ray(o, np.array(v), 5.0).coords for v in ([1.0, 0.0], [-1.0, 0.0], [0.0, 1.0])]
    )
    # the full gradient step from o raises the energy; with no halvings nothing is accepted
    with pytest.raises(ConvergenceError, match="stalled") as info:
        karcher_mean_coords(points, np.ones(3), initial=np.zeros(2), halvings=0)
    assert info.value.residual > 1.0
    mean = karcher_mean_coords(points, np.ones(3), initial=np.zeros(2))
    assert abs(mean[0]) < 1e-9 and mean[1] > 0


def test_quadrature_size_grows_near_the_boundary() -> None:
    assert quadrature_size_for(HPoint.origin(2), 512) == 512
    assert quadrature_size_for(HPoint([0.99, 0.0]), 512) == 3200
    assert quadrature_size_for(HPoint([0.0, 0.0, 0.999]), 1024) == 2**18


def test_extension_of_isometry_traces() -> None:
    rng = np.random.default_rng(3)
    for _ in range(5):
        g = MobiusIsometry.random(2, rng, max_radius=1.0)
        x = _random_point(rng, 2)
        evaluation = extend(make_mobius_trace(g), x, 2048, refine=False)
        _assert_close_points(evaluation.value, g.apply(x), 1e-5, "F_g on the circle")
    g = MobiusIsometry.random(3, rng, max_radius=0.5)
    x = _random_point(rng, 3, 0.3)
    _assert_close_points(extend(make_mobius_trace(g), x, 4096, refine=False).value, g.apply(x), 2e-3, "F_g on S^2")


@pytest.mark.parametrize("degree", [2, 3])
def test_extension_of_powers_fixes_origin(degree: int) -> None:
    evaluation = extend(make_power_map(degree, 1), HPoint.origin(2), 2048)
    assert evaluation.value.norm <= 1e-8
    assert evaluation.refinement is not None and evaluation.refinement <= 1e-8


def test_extension_refinement_is_small() -> None:
    evaluation = extend(make_power_map(2, 1), HPoint([0.3, 0.2]), 256)
    assert evaluation.quadrature_size == 256
    assert evaluation.refinement <= 1e-6


def test_extension_convergence_error_names_the_point() -> None:
    extension = BarycentricExtension(make_power_map(2, 1), 256, max_iter=0)
    with pytest.raises(ConvergenceError) as info:
        extension(HPoint([0.3, 0.2]))
    message = str(info.value)
    assert message.startswith("extension at x=")
    assert message.count("residual=") == 1, message
    assert info.value.last_iterate is not None


def test_extension_equivariance() -> None:
    rng = np.random.default_rng(4)
    f = make_power_map(2, 1)
    for _ in range(3):
        g = MobiusIsometry.random(2, rng, max_radius=1.0)
        h = MobiusIsometry.random(2, rng, max_radius=1.0)
        x = _random_point(rng, 2, 0.5)
        conjugated = compose([make_mobius_trace(h), f, make_mobius_trace(g)])
        left = extend(conjugated, x, 2048, refine=False).value
        right = h.apply(extend(f, g.apply(x), 2048, refine=False).value)
        _assert_close_points(left, right, 1e-6, "F_{h f g}(x) = h F_f(g x)")


def test_extension_approaches_boundary_values() -> None:
    f = parse_map_spec("compose:mobius:0.3,0.2|power:2", 1)
    theta = BPoint.from_angle(0.4)
    expected = f(theta).dir
    extension = BarycentricExtension(f, 1024)
    angles = []
    for t in (2.0, 4.0, 6.0):
        value = extension(exp_ray(HPoint.origin(2), theta.dir, t))
        angles.append(float(angle_between(value.coords / value.norm, expected)))
    assert angles[0] > angles[1] > angles[2], f"visual angles {angles} do not decrease"


def test_jacobian_of_isometry_is_isometric() -> None:
    g = MobiusIsometry.random(2, np.random.default_rng(5), max_radius=1.0)
    jacobian = extension_jacobian(make_mobius_trace(g), HPoint([0.2, -0.3]), 2048)
    singular = np.linalg.svd(jacobian.matrix, compute_uv=False)
    assert jacobian.hyperbolic_norm == pytest.approx(1.0, abs=1e-4)
    assert singular[0] / singular[-1] == pytest.approx(1.0, abs=1e-4)
    assert jacobian.min_eigenvalue > 0


def test_jacobian_matches_finite_differences() -> None:
    f = parse_map_spec("qs:pw2;deg=2", 1)
    extension = BarycentricExtension(f, 1024, tol=1e-12, adaptive=False)
    x = HPoint([0.25, -0.15])
    analytic = extension.jacobian(x).matrix
    step = 1e-5
    numeric = np.stack(
        [
            (extension(HPoint(x.coords + step * e)).coords - extension(HPoint(x.coords - step * e)).coords) / (2 * step)
            for e in np.eye(2)
        ],
        axis=1,
    )
    assert np.max(np.abs(analytic - numeric)) <= 1e-4


def test_jacobian_respects_rotational_symmetry() -> None:
    matrix = extension_jacobian(make_power_map(2, 1), HPoint.origin(2), 1024).matrix
    rotation = plane_rotation(2, 0.7)
    assert np.allclose(matrix @ rotation, rotation @ rotation @ matrix, atol=1e-6)
    assert np.linalg.norm(matrix) <= 1e-6


def test_second_derivative_norm() -> None:
    g = MobiusIsometry.random(2, np.random.default_rng(6), max_radius=1.0)
    assert second_derivative_norm(make_mobius_trace(g), HPoint([0.1, 0.2]), 1024) <= 1e-5
    curved = second_derivative_norm(parse_map_spec("qs:pw2", 1), HPoint([0.3, 0.1]), 1024)
    assert np.isfinite(curved) and curved > 0


def test_normalize() -> None:
    balanced, h = normalize(make_power_map(2, 1))
    assert h.distance_to(MobiusIsometry.identity(2)) <= 1e-8

    g = MobiusIsometry.transvection(HPoint([0.2, -0.1]))
    _, h = normalize(make_mobius_trace(g))
    assert h.distance_to(g.inverse()) <= 1e-6

    balanced, _ = normalize(parse_map_spec("compose:mobius:0.2,0.3|power:2", 1))
    assert extend(balanced, HPoint.origin(2), refine=False).value.norm <= 1e-7
