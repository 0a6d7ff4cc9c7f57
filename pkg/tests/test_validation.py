from __future__ import annotations

import math
from typing import Dict

import numpy as np
import pytest

from barylab.config import ExperimentConfig
from barylab.errors import ConfigError
from barylab.validation import (
    ExperimentReport,
    antithetic_directions,
    cap_directions,
    largest_c0,
    run_annulus_image,
    run_compactness_demo,
    run_density_check,
    run_dome_growth,
    run_gravity,
    run_lipschitz,
    run_modulus_lemmas,
    run_radial_qi,
    run_trig,
    run_volume_noncontraction,
    singular_clusters,
)
from barylab.geometry import angle_between
from barylab.geometry.quadrature import circle_nodes


def _criteria(report: ExperimentReport) -> Dict[str, bool]:
    return {criterion.id: criterion.passed for criterion in report.criteria}


def _assert_passed(report: ExperimentReport, *ids: str) -> None:
    verdicts = _criteria(report)
    for criterion_id in ids or tuple(verdicts):
        assert verdicts.get(criterion_id), f"{report.suite}: {criterion_id} failed ({report.failed()})"


def test_antithetic_directions_pair_up() -> None:
    rng = np.random.default_rng(0)
    for dim in (2, 3):
        directions = antithetic_directions(7, dim, rng)
        assert directions.shape == (8, dim)
        assert np.allclose(np.linalg.norm(directions, axis=1), 1.0)
        assert np.allclose(directions[:4], -directions[4:])


def test_cap_directions_stay_in_the_cap() -> None:
    rng = np.random.default_rng(1)
    for center in (np.array([0.0, 1.0]), np.array([0.0, 0.6, 0.8])):
        points = cap_directions(center, 0.3, 200, rng)
        assert np.all(angle_between(points, center) <= 0.3 + 1e-12)


def test_largest_c0_is_monotone_in_epsilon() -> None:
    radii = [4.0, 6.0]
    distances = np.array([[4.0, 6.0], [2.0, 3.0], [0.5, 0.5], [3.0, 5.0]])
    grid = [0.1, 0.5, 1.0]
    assert largest_c0(distances, radii, grid, 0.3) == pytest.approx(0.5)
    assert largest_c0(distances, radii, grid, 0.05) == pytest.approx(0.1)
    assert largest_c0(distances, radii, grid, 0.8) == pytest.approx(1.0)
    assert largest_c0(np.zeros((3, 2)), radii, grid, 0.1) == 0.0


def test_singular_clusters_group_neighbouring_points() -> None:
    grid = circle_nodes(360)
    gaps = np.zeros(360)
    gaps[10:14] = 0.5
    gaps[200] = 0.3
    caps = singular_clusters(grid, gaps, 0.1)
    assert len(caps) == 2, f"expected two clusters, found {len(caps)}"
    assert singular_clusters(grid, np.zeros(360), 0.1) == []


@pytest.mark.parametrize("n", [1, 2])
def test_gravity_suite_has_no_violations(n: int) -> None:
    report = run_gravity(ExperimentConfig(n=n, trials=150, seed=3))
    _assert_passed(report)
    assert report.scalars["max_dome_distance"] < 1.0
    assert len(report.tables["gravity"]) == 150


@pytest.mark.parametrize("n", [1, 2])
def test_trig_suite_has_no_violations(n: int) -> None:
    report = run_trig(ExperimentConfig(n=n, trials=2000, seed=4))
    _assert_passed(report, "trig.zero_violations", "trig.law_of_cosines_consistent")
    rows = report.tables["trig"]
    assert len(rows) == 2000
    assert min(row["a"] for row in rows) >= 0.1


def test_modulus_suites_need_the_two_sphere() -> None:
    with pytest.raises(ConfigError, match="n=2 required"):
        run_modulus_lemmas(ExperimentConfig(n=1, trials=4))
    with pytest.raises(ConfigError, match="n=2 required"):
        run_annulus_image(ExperimentConfig(n=1, trials=4))


def test_modulus_lemmas() -> None:
    report = run_modulus_lemmas(ExperimentConfig(n=2, trials=40, seed=5))
    _assert_passed(
        report,
        "modulus.distance_inequality",
        "modulus.equality_at_feet",
        "modulus.strict_off_feet",
        "modulus.dome_center_distance",
        "modulus.construction_modulus",
        "modulus.construction_trimmed",
    )
    assert len(report.tables["modulus"]) == 40
    assert len(report.tables["modulus_construction"]) == 40


def test_annulus_image_of_conformal_map() -> None:
    config = ExperimentConfig(n=2, map_spec="mobius:0.2,0.1,-0.1", trials=4, seed=6)
    report = run_annulus_image(config)
    _assert_passed(report)
    assert report.scalars["C1"] == pytest.approx(1.0, abs=1e-2)


def test_annulus_image_reports_lambda0_exceedances() -> None:
    config = ExperimentConfig(n=2, map_spec="power:2", trials=3, lambda0=0.5, seed=7)
    report = run_annulus_image(config)
    assert report.scalars["exceedances"] == 3
    assert not _criteria(report)["annulus_image.exists"]
    assert all(row["reason"] == "modulus above lambda0" for row in report.tables["annulus_image"])


def test_lipschitz_of_isometry_trace() -> None:
    report = run_lipschitz(ExperimentConfig(map_spec="mobius:0.3,0.1", points=3, quadrature_N=1024))
    _assert_passed(report)
    assert report.scalars["sup_jacobian_R6"] == pytest.approx(1.0, abs=1e-3)
    assert {row["radius"] for row in report.tables["lipschitz"]} == {2.0, 4.0, 6.0}


def test_lipschitz_plateau_of_the_double_cover() -> None:
    report = run_lipschitz(ExperimentConfig(map_spec="power:2", points=4, quadrature_N=1024))
    _assert_passed(report, "lipschitz.plateau", "lipschitz.finite")
    assert report.scalars["sup_jacobian_R4"] > 0
    assert report.scalars["plateau_ratio"] <= 1.05


@pytest.mark.parametrize("n", [1, 2])
def test_density_suite_records_the_exponent_mismatch(n: int) -> None:
    report = run_density_check(ExperimentConfig(n=n))
    _assert_passed(report, "density.normalized", "density.cap_mass_matches", "density.printed_exponent_mismatch")
    assert report.scalars["printed_cap_gap"] >= 0.1
    rows = report.tables["density"]
    assert [row["distance"] for row in rows] == [0.25, 0.5]
    assert all(row["cap_mass_exact"] > 0.5 for row in rows), "the cap faces x"
    if n == 1:
        assert report.scalars["printed_total_mass"] == pytest.approx(1.0)
        assert report.notes
    else:
        assert report.scalars["printed_total_mass"] < 0.99


def test_density_suite_with_the_printed_exponent_fails_normalization() -> None:
    report = run_density_check(ExperimentConfig(n=2, density_exponent=1.0))
    verdicts = _criteria(report)
    assert not verdicts["density.normalized"]
    assert verdicts["density.printed_exponent_mismatch"]


def test_volume_of_isometry_trace() -> None:
    config = ExperimentConfig(
        map_spec="mobius:0.2,-0.3", directions=200, radii=[3.0, 6.0], deltas=[0.5, 0.25, math.pi], seed=8
    )
    report = run_volume_noncontraction(config)
    _assert_passed(report)
    whole = [row for row in report.tables["volume"] if row["delta"] == pytest.approx(math.pi)]
    assert whole and all(row["fraction"] == 1.0 for row in whole)


def test_radial_qi_of_isometry_and_covering() -> None:
    isometry = run_radial_qi(ExperimentConfig(map_spec="mobius:0.2,0.2", directions=20, radii=[2.0, 4.0]))
    _assert_passed(isometry)
    assert isometry.scalars["c0"] == pytest.approx(1.0)

    covering = run_radial_qi(ExperimentConfig(map_spec="power:2", directions=20, radii=[2.0, 4.0], seed=1))
    _assert_passed(covering, "radial_qi.positive_c0", "radial_qi.monotone_in_epsilon")
    assert covering.scalars["c0_epsilon0.5"] >= covering.scalars["c0_epsilon0.05"]


def test_constant_family_has_no_singular_caps() -> None:
    report = run_compactness_demo(ExperimentConfig(quadrature_N=512, family_size=3), step=0.0)
    _assert_passed(report)
    assert report.scalars["singular_caps"] == 0
    assert all(row["sup_gap_to_next"] in (None, 0.0) for row in report.tables["compactness"])


def test_transvected_family_stays_normalized() -> None:
    report = run_compactness_demo(ExperimentConfig(quadrature_N=512, family_size=4, seed=2), step=0.5)
    _assert_passed(report, "compactness.normalized_at_origin")
    assert len(report.tables["compactness"]) == 4
    assert report.scalars["degree"] == 2


def test_dome_growth_fits_a_line() -> None:
    report = run_dome_growth(ExperimentConfig(map_spec="power:2", points=6, seed=9))
    _assert_passed(report, "dome_growth.no_solver_failures")
    rows = report.tables["dome_growth"]
    assert len(rows) == 6
    assert all(row["distance"] > 0 for row in rows)
    assert np.isfinite(report.scalars["C"])


def test_report_summary_lists_criteria() -> None:
    report = ExperimentReport("demo", "abc")
    report.check("demo.ok", "always true", True, 1)
    report.check("demo.bad", "always false", False)
    report.tables["trig"] = []
    summary = report.to_summary()
    assert summary["passed"] is False
    assert [c["id"] for c in summary["criteria"]] == ["demo.ok", "demo.bad"]
    assert summary["tables"] == ["trig"]
    assert [c.id for c in report.failed()] == ["demo.bad"]
