"""Configuration models for barylab experiments and command-line runs."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError

HASH_DIGITS = 16


class ExperimentConfig(BaseModel):
    """Flat experiment parameters; a JSON config file uses the same keys."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    map_spec: str = Field(default="power:2", min_length=1, max_length=512)
    n: int = 1
    quadrature_N: int = Field(default=2048, ge=4, le=2**18)
    directions: int = Field(default=1000, ge=2, le=1_000_000)
    trials: int = Field(default=1000, ge=1, le=1_000_000)
    points: int = Field(default=24, ge=1, le=100_000)
    radii: List[float] = Field(default_factory=lambda: [4.0, 6.0, 8.0], min_length=1)
    epsilon: float = Field(default=0.1, gt=0.0, lt=1.0)
    deltas: List[float] = Field(default_factory=lambda: [0.5, 0.25, 0.1], min_length=1)
    eta_t: float = Field(default=1.0, gt=0.0)
    lambda0: float = Field(default=6.0, gt=0.0)
    seed: int = Field(default=0, ge=0)
    R: float = Field(default=2.0, ge=0.5, le=8.0)
    h: float = Field(default=0.1, ge=0.01, le=0.5)
    tol: float = Field(default=1e-8, gt=0.0, le=1e-2)
    max_iter: int = Field(default=5000, ge=1, le=1_000_000)
    density_exponent: Optional[float] = Field(default=None, ge=0.0)
    family_size: int = Field(default=6, ge=2, le=32)
    c0_grid: List[float] = Field(default_factory=lambda: [round(0.05 * k, 2) for k in range(1, 21)], min_length=1)

    @field_validator("n")
    @classmethod
    def _check_n(cls, value: int) -> int:
        if value not in (1, 2):
            raise ValueError("n must be 1 or 2")
        return value

    @field_validator("radii")
    @classmethod
    def _check_radii(cls, value: List[float]) -> List[float]:
        if any(r <= 0 for r in value):
            raise ValueError("radii must be positive")
        if list(value) != sorted(value):
            raise ValueError("radii must be sorted ascending")
        return value

    @field_validator("deltas")
    @classmethod
    def _check_deltas(cls, value: List[float]) -> List[float]:
        if any(not 0.0 < d <= 3.141592653589793 for d in value):
            raise ValueError("deltas must lie in (0, pi]")
        return value

    @field_validator("c0_grid")
    @classmethod
    def _check_c0_grid(cls, value: List[float]) -> List[float]:
        if any(c <= 0 for c in value):
            raise ValueError("c0 candidates must be positive")
        return sorted(value)

    @property
    def exponent(self) -> float:
        return float(self.n) if self.density_exponent is None else self.density_exponent

    @classmethod
    def from_sources(
        cls, config_file: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None
    ) -> "ExperimentConfig":
        """Keys from the JSON file, then explicit overrides on top."""
        values: Dict[str, Any] = {}
        if config_file is not None:
            try:
                with Path(config_file).open() as handle:
                    loaded = json.load(handle)
            except OSError as exc:
                raise ConfigError(f"cannot read config file {config_file}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {config_file} is not valid JSON: {exc}") from exc
            if not isinstance(loaded, dict):
                raise ConfigError(f"config file {config_file} must hold a JSON object")
            values.update(loaded)
        values.update({key: value for key, value in (overrides or {}).items() if value is not None})
        try:
            return cls(**values)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}" for error in exc.errors()
            )
            raise ConfigError(f"invalid configuration: {problems}") from exc

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, separators=(",", ":"))


def config_hash(config: ExperimentConfig) -> str:
    """First 16 hex digits of the SHA-256 of the canonical config JSON."""
    return hashlib.sha256(config.canonical_json().encode("utf-8")).hexdigest()[:HASH_DIGITS]


@dataclass
class SolverSettings:
    """Inner solver tolerances shared by the suites."""

    barycenter_tol: float = 1e-9
    barycenter_max_iter: int = 100
    karcher_tol: float = 1e-12
    derivative_tol: float = 1e-12


@dataclass
class OutputPaths:
    """Output directory of one run; created on construction."""

    root: Path
    manifest: Path = field(init=False)
    summary: Path = field(init=False)

    def __post_init__(self) -> None:
        self.root = Path(self.root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest = self.root / "manifest.json"
        self.summary = self.root / "summary.json"

    def file(self, name: str) -> Path:
        return self.root / name
