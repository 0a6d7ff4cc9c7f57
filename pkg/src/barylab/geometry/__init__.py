"""Ball-model hyperbolic geometry used by the extension, solver and verification layers."""

from .domes import (
    ConformalAnnulus,
    Dome,
    RoundAnnulus,
    RoundBall,
    annulus_log_ratio,
    cap_mass,
    conformal_annulus,
    dome_center,
    dome_contains,
    dome_distance,
    dome_signed_distance,
    map_ball,
    mod_round_annulus,
    modulus_from_log_ratio,
    perpendicular_feet,
    sphere_measure_constant,
    visual_cap,
    visual_cap_mass,
    visual_diameter,
)
from .hyperbolic import (
    busemann,
    busemann_array,
    busemann_euclidean_gradient,
    busemann_hessian,
    convex_project,
    direction_to_boundary,
    direction_to_boundary_array,
    dist,
    distance_array,
    exp_ray,
    exp_ray_array,
    gromov_angle_bound,
    law_of_cosines_angle,
    log_map,
    log_map_array,
    segment_foot,
    tangent_norm,
    triangle_angle,
    visual_angle,
    visual_density,
    visual_density_array,
)
from .isometry import MobiusIsometry, plane_rotation
from .points import (
    BPoint,
    HPoint,
    PointLike,
    angle_between,
    conformal_factor,
    mobius_add,
    named_direction,
    normalize_rows,
    tangent_frame,
)

__all__ = [
    "BPoint",
    "ConformalAnnulus",
    "Dome",
    "HPoint",
    "MobiusIsometry",
    "PointLike",
    "RoundAnnulus",
    "RoundBall",
    "angle_between",
    "annulus_log_ratio",
    "busemann",
    "busemann_array",
    "busemann_euclidean_gradient",
    "busemann_hessian",
    "cap_mass",
    "conformal_annulus",
    "conformal_factor",
    "convex_project",
    "direction_to_boundary",
    "direction_to_boundary_array",
    "dist",
    "distance_array",
    "dome_center",
    "dome_contains",
    "dome_distance",
    "dome_signed_distance",
    "exp_ray",
    "exp_ray_array",
    "gromov_angle_bound",
    "law_of_cosines_angle",
    "log_map",
    "log_map_array",
    "map_ball",
    "mobius_add",
    "mod_round_annulus",
    "modulus_from_log_ratio",
    "named_direction",
    "normalize_rows",
    "perpendicular_feet",
    "plane_rotation",
    "segment_foot",
    "sphere_measure_constant",
    "tangent_frame",
    "tangent_norm",
    "triangle_angle",
    "visual_angle",
    "visual_cap",
    "visual_cap_mass",
    "visual_density",
    "visual_density_array",
    "visual_diameter",
]
