from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List

import pytest

from barylab.cli import main
from barylab.config import OutputPaths
from barylab.data import tables


def _config_file(directory: Path, **values) -> str:
    path = directory / "config.json"
    path.write_text(json.dumps(values), encoding="utf-8")
    return str(path)


def _rows(out_dir: Path, table: str) -> List[Dict[str, str]]:
    return tables.load_output_table(OutputPaths(out_dir), table)[1]


def test_extend_identity_at_origin(tmp_path: Path) -> None:
    code = main(["extend", "--map", "power:1", "--n", "1", "--points", "0,0", "--out-dir", str(tmp_path)])
    assert code == 0
    (row,) = _rows(tmp_path, "extend")
    assert abs(float(row["F0"])) <= 1e-9 and abs(float(row["F1"])) <= 1e-9
    assert float(row["jacobian_norm"]) == pytest.approx(1.0, abs=1e-6)
    assert row["failed"] == "0"
    manifest = tables.load_json(tmp_path / "manifest.json")
    assert "extend.csv" in manifest["outputs"]
    assert set(manifest["versions"]) == {"barylab", "numpy", "scipy"}


def test_extend_radial_points(tmp_path: Path) -> None:
    code = main(["extend", "--map", "power:2", "--radial", "10", "--R", "2", "--out-dir", str(tmp_path)])
    assert code == 0
    rows = _rows(tmp_path, "extend")
    assert len(rows) == 10
    assert all(row["refinement"] != "" for row in rows), "refinement column must be filled"


def test_malformed_map_spec_exits_1(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    code = main(["extend", "--map", "power:x", "--points", "0,0", "--out-dir", str(tmp_path)])
    assert code == 1
    assert "'x'" in capsys.readouterr().err


def test_usage_errors_exit_1() -> None:
    with pytest.raises(SystemExit) as excinfo:
        main(["verify"])
    assert excinfo.value.code == 1
    with pytest.raises(SystemExit) as excinfo:
        main(["unknown-command"])
    assert excinfo.value.code == 1


def test_dirichlet_isometry_summary(tmp_path: Path) -> None:
    code = main(
        ["dirichlet", "--map", "mobius:0.2,0.1", "--R", "2", "--h", "0.05", "--tol", "1e-7", "--svg", "--out-dir", str(tmp_path)]
    )
    assert code == 0
    summary = tables.load_json(tmp_path / "summary.json")
    assert summary["rho_R"] <= 5e-3
    assert summary["energy_monotone"] is True
    assert summary["unconverged"] is False
    assert (tmp_path / "dirichlet_energy.svg").exists()
    assert len(_rows(tmp_path, "dirichlet_mesh")) == summary["vertices"]


def test_dirichlet_bounds_exit_1(tmp_path: Path) -> None:
    assert main(["dirichlet", "--map", "power:2", "--R", "20", "--out-dir", str(tmp_path)]) == 1


def test_dirichlet_non_convergence_keeps_partial_outputs(tmp_path: Path) -> None:
    config = _config_file(tmp_path, map_spec="power:2", R=1.0, h=0.2, max_iter=1)
    out_dir = tmp_path / "out"
    assert main(["dirichlet", "--config", config, "--out-dir", str(out_dir)]) == 3
    summary = tables.load_json(out_dir / "summary.json")
    assert summary["unconverged"] is True
    assert (out_dir / "dirichlet_mesh.csv").exists()


def test_verify_gravity_passes(tmp_path: Path) -> None:
    config = _config_file(tmp_path, trials=50)
    out_dir = tmp_path / "out"
    assert main(["verify", "--suite", "gravity", "--config", config, "--out-dir", str(out_dir)]) == 0
    summary = tables.load_json(out_dir / "summary.json")
    assert summary["passed"] is True
    assert summary["criteria"][0]["id"] == "gravity.zero_violations"
    first_line = (out_dir / "gravity.csv").read_text(encoding="utf-8").split("\n")[0]
    assert first_line == f"# config_hash={summary['config_hash']}"


def test_verify_density_records_the_exponent_mismatch(tmp_path: Path) -> None:
    config = _config_file(tmp_path, n=2)
    out_dir = tmp_path / "out"
    assert main(["verify", "--suite", "density", "--config", config, "--out-dir", str(out_dir)]) == 0
    summary = tables.load_json(out_dir / "summary.json")
    assert summary["passed"] is True
    rows = _rows(out_dir, "density")
    assert len(rows) == 2
    assert all(abs(float(row["total_mass"]) - 1.0) <= 1e-6 for row in rows)


def test_verify_unknown_suite_lists_valid_names(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    assert main(["verify", "--suite", "nope", "--out-dir", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "gravity" in err and "radial-qi" in err


def test_verify_modulus_needs_n2(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    assert main(["verify", "--suite", "modulus", "--n", "1", "--out-dir", str(tmp_path)]) == 1
    assert "n=2 required" in capsys.readouterr().err


def test_verify_failed_criterion_exits_2(tmp_path: Path) -> None:
    config = _config_file(tmp_path, n=2, map_spec="power:2", trials=2, lambda0=0.5)
    out_dir = tmp_path / "out"
    assert main(["verify", "--suite", "annulus-image", "--config", config, "--out-dir", str(out_dir)]) == 2
    assert tables.load_json(out_dir / "summary.json")["passed"] is False


@pytest.mark.parametrize(
    ("suite", "table", "values"),
    [
        ("trig", "trig", {"trials": 300}),
        ("radial-qi", "radial_qi", {"directions": 10, "radii": [2.0, 3.0]}),
    ],
)
def test_same_seed_gives_identical_tables(tmp_path: Path, suite: str, table: str, values: Dict[str, object]) -> None:
    config = _config_file(tmp_path, seed=7, **values)
    outputs = []
    for name in ("first", "second"):
        out_dir = tmp_path / name
        assert main(["verify", "--suite", suite, "--config", config, "--out-dir", str(out_dir)]) == 0
        outputs.append((out_dir / f"{table}.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_worker_count_does_not_change_outputs(tmp_path: Path, threads) -> None:
    config = _config_file(tmp_path, trials=30, seed=11)
    outputs = []
    for count in (1, 4):
        threads(count)
        out_dir = tmp_path / f"workers{count}"
        assert main(["verify", "--suite", "gravity", "--config", config, "--out-dir", str(out_dir)]) == 0
        outputs.append((out_dir / "gravity.csv").read_bytes())
    assert outputs[0] == outputs[1]
