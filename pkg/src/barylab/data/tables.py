"""CSV and JSON outputs with a config-hash header and atomic writes."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..config import OutputPaths

OUTPUT_TABLES = {
    "extend": "extend.csv",
    "dirichlet_mesh": "dirichlet_mesh.csv",
    "dirichlet_energy": "dirichlet_energy.csv",
    "lipschitz": "lipschitz.csv",
    "volume": "volume.csv",
    "radial_qi": "radial_qi.csv",
    "radial_qi_fractions": "radial_qi_fractions.csv",
    "modulus": "modulus.csv",
    "modulus_construction": "modulus_construction.csv",
    "annulus_image": "annulus_image.csv",
    "compactness": "compactness.csv",
    "compactness_caps": "compactness_caps.csv",
    "gravity": "gravity.csv",
    "trig": "trig.csv",
    "dome_growth": "dome_growth.csv",
    "density": "density.csv",
}

HASH_PREFIX = "# config_hash="


def table_path(paths: OutputPaths, table_name: str) -> Path:
    if table_name not in OUTPUT_TABLES:
        raise KeyError(f"Unsupported output table: {table_name}")
    return paths.file(OUTPUT_TABLES[table_name])


def format_value(value: object) -> str:
    """12 significant digits for reals; booleans as 0/1; None as an empty cell."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _atomic_write(target: Path, text: str) -> Path:
    target.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w", dir=target.parent, prefix=f".{target.name}.", suffix=".tmp", delete=False, newline="", encoding="utf-8"
    )
    try:
        with handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(handle.name, target)
    except BaseException:
        Path(handle.name).unlink(missing_ok=True)
        raise
    return target


def _columns(rows: Sequence[Mapping[str, object]]) -> List[str]:
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def render_csv(rows: Sequence[Mapping[str, object]], digest: str, columns: Optional[Sequence[str]] = None) -> str:
    buffer = io.StringIO()
    buffer.write(f"{HASH_PREFIX}{digest}\n")
    columns = list(columns) if columns is not None else _columns(rows)
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(column)) for column in columns])
    return buffer.getvalue()


def write_output_table(
    rows: Sequence[Mapping[str, object]],
    paths: OutputPaths,
    table_name: str,
    digest: str,
    columns: Optional[Sequence[str]] = None,
) -> Path:
    return _atomic_write(table_path(paths, table_name), render_csv(rows, digest, columns))


def load_output_table(paths: OutputPaths, table_name: str) -> Tuple[str, List[Dict[str, str]]]:
    """(config hash, rows as strings) of a table written by ``write_output_table``."""
    with table_path(paths, table_name).open(newline="", encoding="utf-8") as handle:
        first = handle.readline().rstrip("\n")
        if not first.startswith(HASH_PREFIX):
            raise ValueError(f"{table_name} is missing its config hash header")
        return first[len(HASH_PREFIX) :], list(csv.DictReader(handle))


def _json_default(value: object):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_json(payload: Mapping[str, object], target: Path) -> Path:
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    return _atomic_write(Path(target), text)


def load_json(target: Path) -> Dict[str, object]:
    with Path(target).open(encoding="utf-8") as handle:
        return json.load(handle)
