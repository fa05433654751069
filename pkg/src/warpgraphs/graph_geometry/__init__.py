"""Geometry of vertical graphs and evaluators for the Laplacian identities."""

from .bundle import GeometryBundle, build_bundle, export_bundle, mean_curvature_values
from .formulas import (
    RicciBound,
    ScalarCurvature,
    cmc_deviation,
    comparison_mask,
    hyperbolic_angle,
    laplacian_eta_conformal,
    laplacian_eta_warped,
    laplacian_h_formula,
    ricci_lower_bound_check,
    scalar_curvature,
    tangential_gradient,
)
from .identities import IdentityCheck, identity_suite, oracle_errors
from .surface import GraphSurface, Orientation, orientation_sign

__all__ = [
    "GeometryBundle",
    "GraphSurface",
    "IdentityCheck",
    "Orientation",
    "RicciBound",
    "ScalarCurvature",
    "build_bundle",
    "cmc_deviation",
    "comparison_mask",
    "export_bundle",
    "hyperbolic_angle",
    "identity_suite",
    "laplacian_eta_conformal",
    "laplacian_eta_warped",
    "laplacian_h_formula",
    "mean_curvature_values",
    "oracle_errors",
    "orientation_sign",
    "ricci_lower_bound_check",
    "scalar_curvature",
    "tangential_gradient",
]
