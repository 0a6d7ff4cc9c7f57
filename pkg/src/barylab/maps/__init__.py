"""Boundary map catalog, derivative sampling and distortion/degree estimates."""

from .circle import QsCovering, estimate_eta, make_qs_covering
from .derivatives import (
    DistortionEstimate,
    distortion_ratios,
    estimate_degree,
    estimate_distortion,
    sample_derivative,
    sample_derivatives,
    sphere_log,
    tangent_frames,
)
from .sphere_maps import (
    BRANCH_GUARD,
    SphereMap,
    compose,
    make_mobius_trace,
    make_power_map,
    make_radial_stretch,
    make_winding_map,
)
from .spec_parser import parse_map_spec

__all__ = [
    "BRANCH_GUARD",
    "DistortionEstimate",
    "QsCovering",
    "SphereMap",
    "compose",
    "distortion_ratios",
    "estimate_degree",
    "estimate_distortion",
    "estimate_eta",
    "make_mobius_trace",
    "make_power_map",
    "make_qs_covering",
    "make_radial_stretch",
    "make_winding_map",
    "parse_map_spec",
    "sample_derivative",
    "sample_derivatives",
    "sphere_log",
    "tangent_frames",
]
