"""Ambient models, fiber grids, field containers and finite-difference calculus."""

from .conformal import conformality_residual, metric_compatibility_residual
from .fields import (
    Boundary,
    Grid,
    ScalarField,
    SymTensorField,
    TensorField,
    VectorField,
    read_field_csv,
    write_field_csv,
)
from .finite_diff import (
    DEFAULT_TOL_CONSTANT,
    flat_laplacian,
    laplace_beltrami_oracle,
    partial_derivative,
    tol_grid,
)
from .models import (
    WarpedModel,
    WarpFamily,
    WarpKind,
    ambient_christoffel,
    ambient_metric,
    ambient_ricci_normal,
    hyperbolic_space,
    steady_state_space,
)

__all__ = [
    "Boundary",
    "DEFAULT_TOL_CONSTANT",
    "Grid",
    "ScalarField",
    "SymTensorField",
    "TensorField",
    "VectorField",
    "WarpFamily",
    "WarpKind",
    "WarpedModel",
    "ambient_christoffel",
    "ambient_metric",
    "ambient_ricci_normal",
    "conformality_residual",
    "flat_laplacian",
    "hyperbolic_space",
    "laplace_beltrami_oracle",
    "metric_compatibility_residual",
    "partial_derivative",
    "read_field_csv",
    "steady_state_space",
    "tol_grid",
    "write_field_csv",
]
