"""End-to-end runs behind the command line: extension samples, Dirichlet solves and verification suites."""
from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence

import numpy as np
import scipy

from .. import __version__
from ..barycentric.extension import BarycentricExtension, extend
from ..config import ExperimentConfig, OutputPaths, SolverSettings, config_hash
from ..data import tables
from ..errors import ConfigError, DirichletConvergenceError
from ..geometry.points import HPoint
from ..maps.spec_parser import parse_map_spec
from ..solvers.diagnostics import proof_diagnostics
from ..solvers.dirichlet import DiscreteMap, FlowReport, dump_mesh_rows, solve_dirichlet
from ..solvers.mesh import build_mesh
from ..validation.common import SAMPLE_ERRORS
from ..validation.compactness import run_compactness_demo
from ..validation.density import run_density_check
from ..validation.inequalities import run_gravity, run_trig
from ..validation.lipschitz import run_lipschitz
from ..validation.moduli import run_annulus_image, run_modulus_lemmas
from ..validation.radial import run_dome_growth, run_radial_qi
from ..validation.report import ExperimentReport
from ..validation.volume import run_volume_noncontraction
from .parallel import trial_generators

logger = logging.getLogger(__name__)

SuiteRunner = Callable[..., ExperimentReport]

SUITES: Dict[str, SuiteRunner] = {
    "lipschitz": run_lipschitz,
    "volume": run_volume_noncontraction,
    "radial-qi": run_radial_qi,
    "modulus": run_modulus_lemmas,
    "annulus-image": run_annulus_image,
    "compactness": run_compactness_demo,
    "gravity": run_gravity,
    "trig": run_trig,
    "dome-growth": run_dome_growth,
    "density": run_density_check,
}

ENERGY_SLACK = 1e-12
# floor on the unit directions sampled at x_R
DIAGNOSTIC_DIRECTIONS = 10_000


def package_versions() -> Dict[str, str]:
    return {"barylab": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


@dataclass
class RunManifest:
    """Provenance of one command: what ran, with which config, and what it wrote."""

    command: str
    config_hash: str
    map_spec: str
    versions: Dict[str, str] = field(default_factory=package_versions)
    outputs: List[str] = field(default_factory=list)
    stage_seconds: Dict[str, float] = field(default_factory=dict)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        started = time.perf_counter()
        try:
            yield
        finally:
            self.stage_seconds[name] = time.perf_counter() - started
            logger.info("stage %s finished in %.2fs", name, self.stage_seconds[name])

    def record(self, path: Path) -> Path:
        self.outputs.append(Path(path).name)
        return path

    def write(self, paths: OutputPaths) -> Path:
        self.record(paths.manifest)
        return tables.write_json(asdict(self), paths.manifest)


@dataclass
class ExtendArtifacts:
    rows: List[Dict[str, object]]
    failures: int
    manifest: RunManifest


@dataclass
class DirichletArtifacts:
    mesh_map: DiscreteMap
    report: FlowReport
    summary: Dict[str, object]
    manifest: RunManifest

    @property
    def converged(self) -> bool:
        return self.report.converged


@dataclass
class SuiteArtifacts:
    report: ExperimentReport
    summary: Dict[str, object]
    manifest: RunManifest


def _coordinate_columns(prefix: str, values: np.ndarray) -> Dict[str, float]:
    return {f"{prefix}{axis}": float(value) for axis, value in enumerate(values)}


def run_extend(
    config: ExperimentConfig,
    points: Sequence[HPoint],
    paths: OutputPaths,
    refine: bool = True,
    settings: Optional[SolverSettings] = None,
) -> ExtendArtifacts:
    """F_f, ||DF_f|| and the N versus 4N refinement gap at each point; failed rows are flagged."""
    settings = settings or SolverSettings()
    digest = config_hash(config)
    f = parse_map_spec(config.map_spec, config.n)
    manifest = RunManifest("extend", digest, config.map_spec)
    rows: List[Dict[str, object]] = []
    failures = 0
    with manifest.stage("extend"):
        for index, x in enumerate(points):
            if x.dim != f.dim:
                raise ConfigError(f"point {index} has {x.dim} coordinates; {config.map_spec} needs {f.dim}")
            row: Dict[str, object] = {"point": index}
            row.update(_coordinate_columns("x", x.coords))
            try:
                evaluation = extend(
                    f,
                    x,
                    config.quadrature_N,
                    config.density_exponent,
                    refine=refine,
                    with_jacobian=True,
                    tol=settings.barycenter_tol,
                )
            except SAMPLE_ERRORS as exc:
                failures += 1
                logger.warning("extension at point %d failed: %s", index, exc)
                row.update(_coordinate_columns("F", np.full(f.dim, np.nan)))
                row.update({"jacobian_norm": None, "refinement": None, "quadrature_size": None, "failed": 1, "error": str(exc)})
                rows.append(row)
                continue
            row.update(_coordinate_columns("F", evaluation.value.coords))
            row.update(
                {
                    "jacobian_norm": evaluation.jacobian.hyperbolic_norm,
                    "refinement": evaluation.refinement,
                    "quadrature_size": evaluation.quadrature_size,
                    "failed": 0,
                    "error": "",
                }
            )
            rows.append(row)
    manifest.record(tables.write_output_table(rows, paths, "extend", digest))
    manifest.write(paths)
    return ExtendArtifacts(rows, failures, manifest)


def diagnostic_directions(config: ExperimentConfig) -> int:
    return max(config.directions, DIAGNOSTIC_DIRECTIONS)


def _energy_rows(report: FlowReport) -> List[Dict[str, object]]:
    return [{"iteration": index, "energy": energy} for index, energy in enumerate(report.energies)]


def _energy_monotone(energies: Sequence[float]) -> bool:
    return all(later <= earlier + ENERGY_SLACK for earlier, later in zip(energies, energies[1:]))


def run_dirichlet(
    config: ExperimentConfig,
    paths: OutputPaths,
    svg: bool = False,
    diagnostics: bool = False,
    workers: Optional[int] = None,
    settings: Optional[SolverSettings] = None,
) -> DirichletArtifacts:
    """Solve on B(o, R), dump mesh and energy tables, and summarize rho_R.

    A non-converged flow still writes its partial tables and a summary flagged ``unconverged``
    before the error propagates.
    """
    settings = settings or SolverSettings()
    digest = config_hash(config)
    f = parse_map_spec(config.map_spec, config.n)
    manifest = RunManifest("dirichlet", digest, config.map_spec)
    with manifest.stage("mesh"):
        mesh = build_mesh(config.R, config.h, dim=f.dim)
    extension = BarycentricExtension(
        f, config.quadrature_N, config.density_exponent, tol=settings.barycenter_tol, max_iter=settings.barycenter_max_iter
    )
    failure: Optional[DirichletConvergenceError] = None
    with manifest.stage("solve"):
        try:
            mesh_map, report = solve_dirichlet(f, mesh, config.tol, config.max_iter, extension=extension, workers=workers)
        except DirichletConvergenceError as exc:
            logger.warning("Dirichlet flow did not converge; writing partial outputs")
            failure = exc
            mesh_map, report = exc.mesh_map, exc.report

    summary: Dict[str, object] = {
        "config_hash": digest,
        "config": config.model_dump(),
        "map_spec": config.map_spec,
        "R": mesh.radius,
        "h": mesh.spacing,
        "vertices": mesh.vertex_count,
        "rho_R": report.rho_R,
        "argmax_vertex": report.argmax_vertex,
        "iterations": report.iterations,
        "max_update": report.max_update,
        "balance_residual": report.balance_residual,
        "energies": list(report.energies),
        "energy_monotone": _energy_monotone(report.energies),
        "converged": report.converged,
        "unconverged": not report.converged,
    }
    if diagnostics and failure is None:
        with manifest.stage("diagnostics"):
            (rng,) = trial_generators(config.seed, 1)
            record = proof_diagnostics(
                mesh_map, f, report, directions=diagnostic_directions(config), rng=rng, extension=extension, workers=workers
            )
        summary["diagnostics"] = record.as_dict()

    manifest.record(tables.write_output_table(dump_mesh_rows(mesh_map), paths, "dirichlet_mesh", digest))
    manifest.record(tables.write_output_table(_energy_rows(report), paths, "dirichlet_energy", digest))
    manifest.record(tables.write_json(summary, paths.summary))
    if svg:
        from .plots import plot_energy_curve

        manifest.record(plot_energy_curve(report.energies, paths.file("dirichlet_energy.svg"), title=config.map_spec))
    manifest.write(paths)
    if failure is not None:
        raise failure
    return DirichletArtifacts(mesh_map, report, summary, manifest)


def run_suite(
    name: str,
    config: ExperimentConfig,
    paths: OutputPaths,
    workers: Optional[int] = None,
    settings: Optional[SolverSettings] = None,
) -> SuiteArtifacts:
    """Run one verification suite and persist its tables, summary and manifest."""
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; valid suites: {', '.join(SUITES)}")
    digest = config_hash(config)
    manifest = RunManifest(f"verify:{name}", digest, config.map_spec)
    with manifest.stage(name):
        report = SUITES[name](config, workers=workers, settings=settings)
    for table_name in sorted(report.tables):
        manifest.record(tables.write_output_table(report.tables[table_name], paths, table_name, digest))
    summary = report.to_summary()
    summary["config"] = config.model_dump()
    manifest.record(tables.write_json(summary, paths.summary))
    manifest.write(paths)
    verdict = "passed" if report.passed else "FAILED"
    logger.info("suite %s %s (%d criteria)", name, verdict, len(report.criteria))
    return SuiteArtifacts(report, summary, manifest)
