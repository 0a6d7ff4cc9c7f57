from __future__ import annotations

import numpy as np
import pytest

from barylab.errors import MeshError
from barylab.geometry import HPoint, MobiusIsometry, distance_array
from barylab.maps import make_mobius_trace, make_power_map
from barylab.solvers import (
    DiscreteMap,
    FlowReport,
    build_mesh,
    dump_mesh_rows,
    interpolate,
    proof_diagnostics,
    rho,
    solve_dirichlet,
    solve_harmonic,
)


def _assert_non_increasing(energies, slack: float = 1e-12) -> None:
    steps = np.diff(np.asarray(energies))
    assert np.all(steps <= slack), f"energy increased by {steps.max():.3e}"


@pytest.fixture(scope="module")
def isometry_solution():
    g = MobiusIsometry.transvection(HPoint([0.25, -0.1]))
    mesh = build_mesh(2.0, 0.05)
    mesh_map, report = solve_dirichlet(make_mobius_trace(g), mesh, tol=1e-7)
    return g, mesh_map, report


@pytest.fixture(scope="module")
def covering_solution():
    mesh = build_mesh(1.0, 0.1)
    f = make_power_map(2, 1)
    mesh_map, report = solve_dirichlet(f, mesh, tol=1e-7)
    return f, mesh_map, report


@pytest.fixture(scope="module")
def rho_on_mesh():
    """rho_R of the Dirichlet solution on B(o, radius) at the given spacing, one solve per mesh."""
    isometry = make_mobius_trace(MobiusIsometry.transvection(HPoint([0.25, -0.1])))
    maps = {"covering": make_power_map(2, 1), "isometry": isometry}
    solved = {}

    def solve(name: str, radius: float, spacing: float) -> float:
        key = (name, radius, spacing)
        if key not in solved:
            _, report = solve_dirichlet(maps[name], build_mesh(radius, spacing), tol=1e-7)
            assert report.converged, f"{name} on R={radius}, h={spacing} did not converge"
            _assert_non_increasing(report.energies)
            solved[key] = report.rho_R
        return solved[key]

    return solve


def test_mesh_structure() -> None:
    mesh = build_mesh(1.0, 0.5)
    radii = np.round(distance_array(np.zeros(2), mesh.vertices), 9)
    assert len(set(radii[radii > 0])) >= 2
    lengths = mesh.edge_lengths()
    assert lengths.min() >= 0.25 and lengths.max() <= 1.0, f"edge lengths in [{lengths.min()}, {lengths.max()}]"
    assert np.allclose(radii[mesh.boundary], 1.0, atol=1e-9)
    assert np.all(mesh.weights > 0)

    fine = build_mesh(1.0, 0.1)
    lengths = fine.edge_lengths()
    assert lengths.min() >= 0.05 and lengths.max() <= 0.2
    assert np.all(fine.degrees()[fine.interior] >= 2)


def test_mesh_variants_and_bounds() -> None:
    uniform = build_mesh(1.0, 0.25, weighting="uniform")
    assert np.all(uniform.weights == 1.0)
    solid = build_mesh(0.5, 0.25, dim=3)
    assert solid.dim == 3
    assert np.all(solid.weights > 0)
    assert np.allclose(distance_array(np.zeros(3), solid.vertices[solid.boundary]), 0.5, atol=1e-9)
    with pytest.raises(MeshError):
        build_mesh(0.4, 0.1)
    with pytest.raises(MeshError):
        build_mesh(1.0, 0.6)
    with pytest.raises(MeshError):
        build_mesh(1.0, 0.1, weighting="random")


def test_constant_boundary_data() -> None:
    mesh = build_mesh(1.0, 0.2)
    p = np.array([0.3, -0.4])
    values, flow = solve_harmonic(mesh, np.tile(p, (mesh.vertex_count, 1)))
    assert np.allclose(values, p, atol=1e-14)
    assert flow["iterations"] <= 1
    assert flow["converged"]


def test_isometry_data_is_reproduced(isometry_solution) -> None:
    g, mesh_map, report = isometry_solution
    exact = g.apply_array(mesh_map.mesh.vertices)
    error = distance_array(mesh_map.values, exact).max()
    assert error <= 5e-3, f"isometry reproduced only to {error:.3e}"
    assert report.rho_R <= 5e-3
    assert report.converged
    _assert_non_increasing(report.energies)


def test_covering_flow(covering_solution) -> None:
    f, mesh_map, report = covering_solution
    mesh = mesh_map.mesh
    _assert_non_increasing(report.energies)
    assert report.energies[-1] < report.energies[0]
    assert report.balance_residual <= 1e-6
    assert np.array_equal(mesh_map.values[mesh.boundary], mesh_map.extension_values[mesh.boundary])

    from_origin = distance_array(np.zeros(2), mesh_map.values)
    assert from_origin[mesh.interior].max() <= from_origin[mesh.boundary].max() + 1e-6
    assert np.isfinite(report.rho_R) and report.rho_R >= 0
    assert rho(mesh_map) == pytest.approx(report.rho_R)
    assert rho(DiscreteMap(mesh, mesh_map.values), f) == pytest.approx(report.rho_R, abs=1e-8)
    with pytest.raises(MeshError):
        rho(DiscreteMap(mesh, mesh_map.values))


def test_interpolation(isometry_solution) -> None:
    g, mesh_map, _ = isometry_solution
    vertices = mesh_map.mesh.vertices[:50]
    assert np.allclose(interpolate(mesh_map, vertices), mesh_map.values[:50], atol=1e-9)

    rng = np.random.default_rng(0)
    directions = rng.standard_normal((40, 2))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    points = directions * rng.uniform(0.0, 0.4, size=(40, 1))
    gap = distance_array(interpolate(mesh_map, points), g.apply_array(points)).max()
    assert gap <= 1e-2
    with pytest.raises(MeshError):
        interpolate(mesh_map, np.array([[0.9, 0.0]]))


def test_mesh_dump_rows(covering_solution) -> None:
    _, mesh_map, _ = covering_solution
    rows = dump_mesh_rows(mesh_map)
    assert len(rows) == mesh_map.mesh.vertex_count
    assert set(rows[0]) == {"vertex", "boundary", "x0", "x1", "h0", "h1", "F0", "F1"}
    assert sum(row["boundary"] for row in rows) == int(mesh_map.mesh.boundary.sum())


def test_diagnostics_skip_small_rho(isometry_solution) -> None:
    g, mesh_map, report = isometry_solution
    record = proof_diagnostics(mesh_map, make_mobius_trace(g), report)
    assert record.skipped
    assert "below" in record.reason


def test_diagnostics_on_displaced_map() -> None:
    mesh = build_mesh(2.0, 0.25)
    shift = MobiusIsometry.transvection(HPoint([np.tanh(0.25), 0.0]))
    identity = make_power_map(1, 1)
    mesh_map = DiscreteMap(mesh, shift.apply_array(mesh.vertices), mesh.vertices.copy())
    report = FlowReport((0.0,), 0.5, 0, 0.0, 0.0, 0, True)
    record = proof_diagnostics(mesh_map, identity, report, directions=256)
    assert not record.skipped
    assert record.r_R == pytest.approx(0.5 ** (1.0 / 3.0))
    assert record.fraction_Q == 1.0
    assert record.c == pytest.approx(1.0, abs=1e-3)
    for fraction in (record.fraction_U, record.fraction_V, record.fraction_VUQ):
        assert 0.0 <= fraction <= 1.0
    assert record.trig_violations == 0
    assert record.u_volume_bound == pytest.approx(1.0 / (3.0 * record.c**2))


def test_covering_rho_plateaus_in_R(rho_on_mesh) -> None:
    rhos = [rho_on_mesh("covering", radius, 0.1) for radius in (1.5, 2.5, 3.5)]
    assert all(np.isfinite(rhos))
    assert rhos[2] <= rhos[1] + 0.5, f"rho_R sequence {rhos}"


def test_mesh_refinement_stays_within_isometry_error(rho_on_mesh) -> None:
    coarse, fine = rho_on_mesh("covering", 1.5, 0.1), rho_on_mesh("covering", 1.5, 0.05)
    # mesh error at a pair of resolutions: isometry-data rho_R at h plus at h/2
    mesh_error = rho_on_mesh("isometry", 1.5, 0.1) + rho_on_mesh("isometry", 1.5, 0.05)
    assert abs(coarse - fine) <= 3.0 * mesh_error, f"rho_R {coarse:.3e} vs {fine:.3e}, mesh error {mesh_error:.3e}"


def test_diagnostics_skip_balls_near_the_mesh_boundary() -> None:
    mesh = build_mesh(1.5, 0.25)
    shift = MobiusIsometry.transvection(HPoint([np.tanh(0.25), 0.0]))
    mesh_map = DiscreteMap(mesh, shift.apply_array(mesh.vertices), mesh.vertices.copy())
    report = FlowReport((0.0,), 0.5, 0, 0.0, 0.0, 0, True)
    record = proof_diagnostics(mesh_map, make_power_map(1, 1), report, directions=256)
    assert record.skipped
    assert "R - 1" in record.reason
    assert record.r_R == pytest.approx(0.5 ** (1.0 / 3.0))
