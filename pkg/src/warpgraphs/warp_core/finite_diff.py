"""Second-order finite differences and the discrete Laplace-Beltrami oracle."""

from __future__ import annotations

import numpy as np

from ..errors import GridError, MetricError
from .fields import Grid, ScalarField, SymTensorField

DEFAULT_TOL_CONSTANT = 1.0


def tol_grid(grid: Grid, constant: float = DEFAULT_TOL_CONSTANT) -> float:
    """Discretization tolerance ``C * dx^2`` for a grid."""
    return constant * grid.max_spacing**2


def _shift(values, axis, k):
    return np.roll(values, -k, axis=axis)


def diff(values: np.ndarray, grid: Grid, axis: int, order: int = 1) -> np.ndarray:
    """Array-level derivative along a grid axis.

    ``values`` may carry trailing component axes; only the leading
    ``grid.dim`` axes are spatial. Central differences in the interior;
    Dirichlet axes use one-sided second-order stencils on the end rows.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if not 0 <= axis < grid.dim:
        raise GridError(f"axis {axis} out of range for a {grid.dim}-dimensional grid")
    extent = grid.extents[axis]
    if extent < 4:
        raise GridError("grid too small for the boundary stencil")
    v = np.asarray(values, dtype=float)
    dx = grid.spacing[axis]
    plus, minus = _shift(v, axis, 1), _shift(v, axis, -1)
    if order == 1:
        out = (plus - minus) / (2.0 * dx)
    else:
        out = (plus - 2.0 * v + minus) / dx**2
    if grid.periodic:
        return out

    def take(i):
        return np.take(v, i, axis=axis)

    first = [slice(None)] * v.ndim
    last = [slice(None)] * v.ndim
    first[axis] = 0
    last[axis] = extent - 1
    if order == 1:
        out[tuple(first)] = (-3.0 * take(0) + 4.0 * take(1) - take(2)) / (2.0 * dx)
        out[tuple(last)] = (3.0 * take(-1) - 4.0 * take(-2) + take(-3)) / (2.0 * dx)
    else:
        out[tuple(first)] = (2.0 * take(0) - 5.0 * take(1) + 4.0 * take(2) - take(3)) / dx**2
        out[tuple(last)] = (2.0 * take(-1) - 5.0 * take(-2) + 4.0 * take(-3) - take(-4)) / dx**2
    return out


def gradient(values: np.ndarray, grid: Grid) -> np.ndarray:
    """First derivatives stacked on a new trailing axis."""
    return np.stack([diff(values, grid, i, 1) for i in range(grid.dim)], axis=-1)


def hessian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Second derivatives; mixed entries apply the first-order stencil twice."""
    n = grid.dim
    first = [diff(values, grid, i, 1) for i in range(n)]
    out = np.empty(np.shape(values) + (n, n))
    for i in range(n):
        out[..., i, i] = diff(values, grid, i, 2)
        for j in range(i + 1, n):
            out[..., i, j] = out[..., j, i] = diff(first[i], grid, j, 1)
    return out


def partial_derivative(field: ScalarField, axis: int, order: int = 1) -> ScalarField:
    """Derivative of a scalar field along one grid axis (order 1 or 2)."""
    return ScalarField(field.grid, diff(field.values, field.grid, axis, order))


def flat_laplacian(field: ScalarField) -> ScalarField:
    """Ordinary finite-difference Laplacian (sum of second differences)."""
    grid = field.grid
    return ScalarField(grid, sum(diff(field.values, grid, i, 2) for i in range(grid.dim)))


def check_positive_definite(metric: np.ndarray) -> None:
    lowest = np.linalg.eigvalsh(metric)[..., 0]
    bad = ~(lowest > 0)
    if np.any(bad):
        raise MetricError(np.argwhere(bad)[0])


def _compact_divergence(coef, phi, grid, axis):
    """``d_a(coef d_a phi)`` with face-averaged coefficients (3-point stencil)."""
    dx = grid.spacing[axis]
    coef_face = 0.5 * (coef + _shift(coef, axis, 1))
    flux = coef_face * (_shift(phi, axis, 1) - phi) / dx
    return (flux - _shift(flux, axis, -1)) / dx


def laplace_beltrami_oracle(metric: SymTensorField, phi: ScalarField) -> ScalarField:
    """Discrete ``(1/sqrt|g|) d_i(sqrt|g| g^ij d_j phi)`` built only from metric samples.

    Diagonal terms use a compact conservative stencil, so the flat metric
    reproduces the standard (2n+1)-point Laplacian exactly. Mixed terms
    differentiate the centered flux. On Dirichlet axes the end rows fall
    back to the one-sided divergence of the centered flux.

    Raises
    ------
    MetricError
        If the metric is not positive definite at some grid point.
    """
    grid = metric.grid
    if phi.grid != grid:
        raise GridError("metric and function live on different grids")
    g = metric.values
    check_positive_definite(g)
    sqrt_det = np.sqrt(np.linalg.det(g))
    g_inv = np.linalg.inv(g)
    p = phi.values
    dphi = [diff(p, grid, j, 1) for j in range(grid.dim)]
    total = np.zeros(grid.extents)
    for i in range(grid.dim):
        for j in range(grid.dim):
            coef = sqrt_det * g_inv[..., i, j]
            if i != j:
                total += diff(coef * dphi[j], grid, i, 1)
                continue
            compact = _compact_divergence(coef, p, grid, i)
            if not grid.periodic:
                wide = diff(coef * dphi[i], grid, i, 1)
                edge = [slice(None)] * grid.dim
                for k in (0, -1):
                    edge[i] = k
                    compact[tuple(edge)] = wide[tuple(edge)]
            total += compact
    return ScalarField(grid, total / sqrt_det)
