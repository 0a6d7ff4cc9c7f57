"""Verification suites and the reports they produce."""

from .compactness import run_compactness_demo, singular_clusters
from .density import run_density_check
from .inequalities import run_gravity, run_trig
from .lipschitz import run_lipschitz
from .moduli import inscribed_annulus, run_annulus_image, run_modulus_lemmas
from .radial import largest_c0, run_dome_growth, run_radial_qi
from .report import Criterion, ExperimentReport, fraction
from .sampling import antithetic_directions, cap_directions, uniform_directions
from .volume import run_volume_noncontraction

__all__ = [
    "Criterion",
    "ExperimentReport",
    "antithetic_directions",
    "cap_directions",
    "fraction",
    "inscribed_annulus",
    "largest_c0",
    "run_annulus_image",
    "run_compactness_demo",
    "run_density_check",
    "run_dome_growth",
    "run_gravity",
    "run_lipschitz",
    "run_modulus_lemmas",
    "run_radial_qi",
    "run_trig",
    "run_volume_noncontraction",
    "singular_clusters",
    "uniform_directions",
]
