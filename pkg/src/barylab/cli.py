"""Command-line entry point: ``extend``, ``dirichlet`` and ``verify``.

Exit codes: 0 success, 1 usage or configuration error, 2 partial data failure or a failed
suite criterion, 3 solver non-convergence.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .config import ExperimentConfig, OutputPaths
from .data.points import parse_inline_points, radial_points, read_points_file
from .errors import BarylabError, ConfigError, SuiteFailure
from .geometry.points import HPoint
from .workflows.experiment import SUITES, run_dirichlet, run_extend, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2


class _Parser(argparse.ArgumentParser):
    """argparse reports usage errors with status 2; ours is 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--map", dest="map_spec", help="Map specification, e.g. power:2 or stretch:1.5@north.")
    parser.add_argument("--n", type=int, help="Boundary sphere dimension (1 or 2).")
    parser.add_argument("--N", dest="quadrature_N", type=int, help="Quadrature node count.")
    parser.add_argument("--exponent", dest="density_exponent", type=float, help="Visual density exponent (default n).")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--config", type=Path, help="JSON file with ExperimentConfig keys; flags override it.")
    parser.add_argument("--out-dir", type=Path, default=Path("barylab-out"), help="Directory for CSV/JSON outputs.")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="barylab", description="Barycentric extensions of sphere maps and their verification suites.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    extend = commands.add_parser("extend", help="Evaluate F_f at sample points.")
    _common_arguments(extend)
    sources = extend.add_mutually_exclusive_group(required=True)
    sources.add_argument("--points", help='Inline points "x,y;x,y" in ball coordinates.')
    sources.add_argument("--points-file", type=Path, help="CSV with columns x0..xn.")
    sources.add_argument("--radial", type=int, help="K points along e_1 spaced evenly on [0, R].")
    extend.add_argument("--R", type=float, help="Largest distance for --radial.")
    extend.add_argument("--no-refine", action="store_true", help="Skip the N versus 4N refinement column.")
    extend.set_defaults(handler=cmd_extend)

    dirichlet = commands.add_parser("dirichlet", help="Solve the Dirichlet problem on B(o, R).")
    _common_arguments(dirichlet)
    dirichlet.add_argument("--R", type=float)
    dirichlet.add_argument("--h", type=float, help="Target edge length.")
    dirichlet.add_argument("--tol", type=float)
    dirichlet.add_argument("--svg", action="store_true", help="Also write the energy curve as SVG.")
    dirichlet.add_argument("--diagnostics", action="store_true", help="Add the diagnostics at x_R to the summary.")
    dirichlet.set_defaults(handler=cmd_dirichlet)

    verify = commands.add_parser("verify", help="Run a verification suite.")
    _common_arguments(verify)
    verify.add_argument("--suite", required=True, help=f"One of: {', '.join(SUITES)}.")
    verify.add_argument("--trials", type=int)
    verify.add_argument("--directions", type=int)
    verify.set_defaults(handler=cmd_verify)
    return parser


def _load_config(args: argparse.Namespace, keys: Sequence[str]) -> ExperimentConfig:
    overrides: Dict[str, Any] = {key: getattr(args, key, None) for key in keys}
    return ExperimentConfig.from_sources(args.config, overrides)


COMMON_KEYS = ("map_spec", "n", "quadrature_N", "density_exponent", "seed")


def _extend_points(args: argparse.Namespace, config: ExperimentConfig) -> List[HPoint]:
    dim = config.n + 1
    if args.points is not None:
        return parse_inline_points(args.points, dim)
    if args.points_file is not None:
        return read_points_file(args.points_file, dim)
    return radial_points(args.radial, config.R, dim)


def cmd_extend(args: argparse.Namespace) -> int:
    config = _load_config(args, COMMON_KEYS + ("R",))
    points = _extend_points(args, config)
    paths = OutputPaths(args.out_dir)
    artifacts = run_extend(config, points, paths, refine=not args.no_refine)
    print(f"extend: {len(artifacts.rows)} rows written to {paths.root}")
    if artifacts.failures:
        print(f"extend: {artifacts.failures} points failed; see the 'failed' column", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_dirichlet(args: argparse.Namespace) -> int:
    config = _load_config(args, COMMON_KEYS + ("R", "h", "tol"))
    paths = OutputPaths(args.out_dir)
    artifacts = run_dirichlet(config, paths, svg=args.svg, diagnostics=args.diagnostics)
    print(f"dirichlet: rho_R={artifacts.report.rho_R:.6g} after {artifacts.report.iterations} sweeps")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; valid suites: {', '.join(SUITES)}")
    config = _load_config(args, COMMON_KEYS + ("trials", "directions"))
    paths = OutputPaths(args.out_dir)
    report = run_suite(args.suite, config, paths).report
    for criterion in report.criteria:
        status = "PASS" if criterion.passed else "FAIL"
        print(f"{status} {criterion.id}: {criterion.description}")
    if not report.passed:
        raise SuiteFailure(f"suite {args.suite}: {len(report.failed())} of {len(report.criteria)} criteria failed")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(asctime)s - %(levelname)s - %(message)s")
    try:
        return args.handler(args)
    except BarylabError as exc:
        print(f"barylab {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
