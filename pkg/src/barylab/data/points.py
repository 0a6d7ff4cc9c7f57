"""Readers for the sample points passed to ``extend``."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import List

import numpy as np

from ..errors import ConfigError
from ..geometry.points import HPoint


def parse_inline_points(text: str, dim: int) -> List[HPoint]:
    """``"x,y;x,y"`` with ``dim`` coordinates per point."""
    points = []
    for chunk in (part.strip() for part in text.split(";")):
        if not chunk:
            continue
        try:
            coords = [float(value) for value in chunk.split(",")]
        except ValueError as exc:
            raise ConfigError(f"point '{chunk}' is not a comma-separated list of numbers") from exc
        if len(coords) != dim:
            raise ConfigError(f"point '{chunk}' has {len(coords)} coordinates, expected {dim}")
        points.append(HPoint(coords))
    if not points:
        raise ConfigError("no points given")
    return points


def read_points_file(path: Path, dim: int) -> List[HPoint]:
    """CSV with a header naming columns x0..x{dim-1}; other columns are ignored."""
    columns = [f"x{axis}" for axis in range(dim)]
    points = []
    try:
        with Path(path).open(newline="") as handle:
            reader = csv.DictReader(line for line in handle if not line.startswith("#"))
            missing = [column for column in columns if column not in (reader.fieldnames or [])]
            if missing:
                raise ConfigError(f"points file {path} lacks columns {', '.join(missing)}")
            for number, row in enumerate(reader, start=2):
                try:
                    points.append(HPoint([float(row[column]) for column in columns]))
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"points file {path}, row {number}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read points file {path}: {exc}") from exc
    if not points:
        raise ConfigError(f"points file {path} holds no points")
    return points


def radial_points(count: int, radius: float, dim: int) -> List[HPoint]:
    """``count`` points along e_1 at hyperbolic distances spaced evenly on [0, radius]."""
    if count < 1:
        raise ConfigError("radial point count must be positive")
    distances = np.linspace(0.0, radius, count)
    axis = np.zeros(dim)
    axis[0] = 1.0
    return [HPoint(np.tanh(t / 2.0) * axis) for t in distances]
