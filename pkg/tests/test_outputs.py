from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from barylab.config import ExperimentConfig, OutputPaths, config_hash
from barylab.data import tables
from barylab.data.points import parse_inline_points, radial_points, read_points_file
from barylab.errors import ConfigError
from barylab.geometry import HPoint, dist
from barylab.workflows.experiment import DIAGNOSTIC_DIRECTIONS, diagnostic_directions
from barylab.workflows.parallel import map_ordered, resolve_workers, trial_generators


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def test_config_sources_and_overrides(tmp_path: Path) -> None:
    config_file = _write(tmp_path / "cfg.json", json.dumps({"map_spec": "power:3", "seed": 4, "trials": 10}))
    config = ExperimentConfig.from_sources(config_file, {"seed": 9, "n": None})
    assert config.map_spec == "power:3"
    assert config.seed == 9, "explicit overrides must win over the file"
    assert config.n == 1, "None overrides are ignored"
    assert config.exponent == 1.0
    assert ExperimentConfig(n=2, density_exponent=1.0).exponent == 1.0


@pytest.mark.parametrize(
    "values",
    [
        {"n": 3},
        {"bogus": 1},
        {"radii": [6.0, 4.0]},
        {"deltas": [4.0]},
        {"R": 20.0},
        {"epsilon": 1.5},
    ],
)
def test_invalid_configs_raise_config_error(values) -> None:
    with pytest.raises(ConfigError, match="invalid configuration"):
        ExperimentConfig.from_sources(None, values)


def test_unreadable_config_files(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="not valid JSON"):
        ExperimentConfig.from_sources(_write(tmp_path / "bad.json", "{nope"))
    with pytest.raises(ConfigError, match="JSON object"):
        ExperimentConfig.from_sources(_write(tmp_path / "list.json", "[1, 2]"))
    with pytest.raises(ConfigError, match="cannot read"):
        ExperimentConfig.from_sources(tmp_path / "missing.json")


def test_config_hash_is_stable() -> None:
    first = config_hash(ExperimentConfig(seed=7))
    assert first == config_hash(ExperimentConfig(seed=7))
    assert len(first) == 16 and int(first, 16) >= 0
    assert first != config_hash(ExperimentConfig(seed=8))


def test_output_paths_create_the_directory(tmp_path: Path) -> None:
    paths = OutputPaths(tmp_path / "nested" / "run")
    assert paths.root.is_dir()
    assert paths.summary.name == "summary.json"
    assert paths.file("extra.svg").parent == paths.root


def test_csv_rendering() -> None:
    rows = [{"a": 1, "b": 0.1 + 0.2, "flag": True}, {"a": 2, "c": None, "flag": np.bool_(False)}]
    text = tables.render_csv(rows, "abc123")
    lines = text.split("\n")
    assert lines[0] == "# config_hash=abc123"
    assert lines[1] == "a,b,flag,c"
    assert lines[2] == "1,0.3,1,"
    assert lines[3] == "2,,0,"
    assert "\r" not in text
    assert tables.format_value(np.float64(1.0 / 3.0)) == "0.333333333333"


def test_tables_round_trip_and_registry(tmp_path: Path) -> None:
    paths = OutputPaths(tmp_path)
    target = tables.write_output_table([{"trial": 0, "angle": 0.5}], paths, "trig", "feedbeef")
    assert target.name == "trig.csv"
    digest, rows = tables.load_output_table(paths, "trig")
    assert digest == "feedbeef"
    assert rows == [{"trial": "0", "angle": "0.5"}]
    assert not list(tmp_path.glob("*.tmp")), "temporary files must be renamed away"
    with pytest.raises(KeyError, match="Unsupported output table"):
        tables.table_path(paths, "nope")


def test_json_summary_is_sorted_and_numpy_aware(tmp_path: Path) -> None:
    target = tables.write_json({"b": np.float64(1.5), "a": np.arange(2)}, tmp_path / "summary.json")
    text = target.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert tables.load_json(target) == {"a": [0, 1], "b": 1.5}


def test_inline_points() -> None:
    points = parse_inline_points("0,0; 0.5,-0.25", 2)
    assert [p.coords.tolist() for p in points] == [[0.0, 0.0], [0.5, -0.25]]
    with pytest.raises(ConfigError, match="expected 2"):
        parse_inline_points("0,0,0", 2)
    with pytest.raises(ConfigError, match="numbers"):
        parse_inline_points("a,b", 2)
    with pytest.raises(ConfigError):
        parse_inline_points(" ; ", 2)


def test_points_file(tmp_path: Path) -> None:
    good = _write(tmp_path / "points.csv", "# sample\nx0,x1,label\n0.1,0.2,a\n-0.3,0,b\n")
    points = read_points_file(good, 2)
    assert len(points) == 2
    assert points[1].coords.tolist() == [-0.3, 0.0]
    with pytest.raises(ConfigError, match="lacks columns"):
        read_points_file(_write(tmp_path / "short.csv", "x0\n0.1\n"), 2)
    with pytest.raises(ConfigError, match="row 2"):
        read_points_file(_write(tmp_path / "outside.csv", "x0,x1\n1.5,0\n"), 2)


def test_radial_points_are_evenly_spaced() -> None:
    points = radial_points(5, 2.0, 2)
    distances = [dist(HPoint.origin(2), p) for p in points]
    assert np.allclose(distances, [0.0, 0.5, 1.0, 1.5, 2.0])
    with pytest.raises(ConfigError):
        radial_points(0, 2.0, 2)


def test_worker_count_resolution(threads) -> None:
    assert resolve_workers() == 1
    threads(3)
    assert resolve_workers() == 3
    assert resolve_workers(2) == 2
    threads("many")
    assert resolve_workers() == 1
    threads(0)
    assert resolve_workers() == 1


def test_diagnostics_sample_at_least_ten_thousand_directions() -> None:
    assert DIAGNOSTIC_DIRECTIONS == 10_000
    assert diagnostic_directions(ExperimentConfig()) == 10_000
    assert diagnostic_directions(ExperimentConfig(directions=20_000)) == 20_000


def test_map_ordered_keeps_input_order() -> None:
    items = list(range(40))
    assert map_ordered(lambda k: k * k, items, workers=4) == [k * k for k in items]


def test_trial_generators_are_reproducible() -> None:
    first = [rng.random() for rng in trial_generators(5, 3)]
    second = [rng.random() for rng in trial_generators(5, 3)]
    assert first == second
    assert len(set(first)) == 3
