"""Exception hierarchy shared by the library and the command-line entry point."""
from __future__ import annotations

from typing import Optional

import numpy as np


class BarylabError(Exception):
    """Base class; ``exit_code`` is the process status the CLI reports for it."""

    exit_code = 1


class GeometryError(BarylabError, ValueError):
    """Invalid point, ball, annulus or degenerate segment."""


class MapSpecError(BarylabError, ValueError):
    """A map specification string could not be parsed."""

    def __init__(self, spec: str, token: str, reason: str) -> None:
        super().__init__(f"{reason}: '{token}' in map spec '{spec}'")
        self.spec = spec
        self.token = token


class MapEvaluationError(BarylabError):
    """Evaluation or differentiation failed at a boundary point."""

    exit_code = 2

    def __init__(self, message: str, theta: Optional[np.ndarray] = None) -> None:
        if theta is not None:
            message = f"{message} at theta={np.array2string(np.asarray(theta), precision=6)}"
        super().__init__(message)
        self.theta = theta


class DegreeEstimateError(BarylabError):
    exit_code = 2

    def __init__(self, estimate: float, residual: float) -> None:
        super().__init__(f"degree estimate {estimate:.4f} is {residual:.4f} away from an integer")
        self.estimate = estimate
        self.residual = residual


class MeasureError(BarylabError, ValueError):
    """Invalid, too small or too concentrated discrete measure."""


class MeshError(BarylabError, ValueError):
    """Mesh parameters outside the supported range."""


class ConfigError(BarylabError, ValueError):
    """Experiment configuration could not be loaded or validated."""


class ConvergenceError(BarylabError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    exit_code = 3

    def __init__(self, message: str, last_iterate: Optional[np.ndarray] = None, residual: float = float("nan")) -> None:
        super().__init__(f"{message} (residual={residual:.3e})")
        self.message = message
        self.last_iterate = last_iterate
        self.residual = residual


class DirichletConvergenceError(ConvergenceError):
    """Non-convergence of the harmonic-map flow; keeps the partial solution."""

    def __init__(self, message: str, mesh_map, report) -> None:
        super().__init__(message, None, report.max_update)
        self.mesh_map = mesh_map
        self.report = report


class SuiteFailure(BarylabError):
    """A verification suite ran but at least one criterion failed."""

    exit_code = 2
