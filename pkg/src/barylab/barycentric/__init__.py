"""Boundary measures, Busemann barycenters and the barycentric extension."""

from .barycenter import (
    BacktrackingLineSearch,
    BarycenterResult,
    FunctionalValue,
    barycenter,
    busemann_functional,
    karcher_mean,
    karcher_mean_batch,
    karcher_mean_coords,
)
from .extension import (
    BarycentricExtension,
    ExtensionEvaluation,
    ExtensionJacobian,
    extend,
    extension_jacobian,
    normalize,
    quadrature_size_for,
    second_derivative_norm,
)
from .measures import DiscreteMeasure, pushforward, quadrature, reweight_visual, transport, visual_weights

__all__ = [
    "BacktrackingLineSearch",
    "BarycenterResult",
    "BarycentricExtension",
    "DiscreteMeasure",
    "ExtensionEvaluation",
    "ExtensionJacobian",
    "FunctionalValue",
    "barycenter",
    "busemann_functional",
    "extend",
    "extension_jacobian",
    "karcher_mean",
    "karcher_mean_batch",
    "karcher_mean_coords",
    "normalize",
    "pushforward",
    "quadrature",
    "quadrature_size_for",
    "reweight_visual",
    "second_derivative_norm",
    "transport",
    "visual_weights",
]
