"""Closed-form Laplacian and curvature identities evaluated on a bundle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CMCRequiredError, UnsupportedError, WarpGraphError
from ..warp_core import ScalarField, ambient_ricci_normal, tol_grid
from ..warp_core.finite_diff import gradient
from .bundle import GeometryBundle

CMC_TOL_FACTOR = 10.0


def comparison_mask(grid, margin: int = 2) -> np.ndarray:
    """Points used for comparisons: all on periodic grids, interior on Dirichlet ones."""
    return grid.interior_mask(margin)


def cmc_deviation(bundle: GeometryBundle) -> float:
    """``max |H - mean(H)|``, over the solver-controlled points on Dirichlet grids."""
    H = bundle.H.values[comparison_mask(bundle.grid, 1)]
    return float(np.max(np.abs(H - H.mean())))


def default_cmc_tol(bundle: GeometryBundle) -> float:
    return CMC_TOL_FACTOR * tol_grid(bundle.grid)


def laplacian_h_formula(bundle: GeometryBundle) -> ScalarField:
    """``(log f)'(h) (eps n - |grad h|^2) + eps n H <N, dt>``."""
    eps, n = bundle.model.epsilon, bundle.n
    h = bundle.h.values
    value = bundle.model.warp.dlogf(h) * (eps * n - bundle.grad_h_norm2.values)
    value = value + eps * n * bundle.H.values * bundle.normal_t.values
    return ScalarField(bundle.grid, value)


def laplacian_eta_warped(bundle: GeometryBundle, fiber_ricci=0.0, tol_H: float | None = None) -> ScalarField:
    """Laplacian of eta for a constant mean curvature graph in the warped product.

    ``-eps eta {Ric_M(N^T, N^T) + (n-1)(log f)''(1 - <N,dt>^2) + |A|^2} - eps n H f'``.
    ``fiber_ricci`` is the fiber Ricci term; zero for the flat fiber.

    Raises
    ------
    CMCRequiredError
        If H deviates from its mean by more than ``tol_H``
        (default ``10 * tol_grid``).
    """
    tol_H = default_cmc_tol(bundle) if tol_H is None else tol_H
    deviation = cmc_deviation(bundle)
    if deviation > tol_H:
        raise CMCRequiredError(
            f"formula requires CMC: max |H - mean(H)| = {deviation:.3e} exceeds {tol_H:.3e}; "
            "use laplacian_eta_conformal for varying H"
        )
    eps, n = bundle.model.epsilon, bundle.n
    warp = bundle.model.warp
    h = bundle.h.values
    c = bundle.normal_t.values
    bracket = fiber_ricci + (n - 1) * warp.d2logf(h) * (1.0 - c**2) + bundle.A_norm2.values
    value = -eps * bundle.eta.values * bracket - eps * n * bundle.H.values * warp.df(h)
    return ScalarField(bundle.grid, value)


def tangential_gradient(bundle: GeometryBundle, values: np.ndarray) -> np.ndarray:
    """Contravariant components ``g^ij d_j phi`` of the intrinsic gradient."""
    dphi = gradient(values, bundle.grid)
    return np.einsum("...ij,...j->...i", bundle.g_inv.values, dphi)


def laplacian_eta_conformal(bundle: GeometryBundle, fiber_ricci=0.0) -> ScalarField:
    """General conformal-field formula for the Laplacian of eta, H allowed to vary.

    ``-eps n <V, grad H> - eps eta {Ric(N, N) + |A|^2} - n (eps H phi + N(phi))``
    with ``V = f dt`` and conformal factor ``phi = f'``. The gradient of H is
    a finite-difference gradient of the H samples.
    """
    model = bundle.model
    eps, n = model.epsilon, bundle.n
    warp = model.warp
    h = bundle.h.values
    c = bundle.normal_t.values
    f = warp.f(h)
    grad_H = tangential_gradient(bundle, bundle.H.values)
    du = gradient(h, bundle.grid)
    # <f dt, X> = f eps X^t and X^t = u_i X^i for X tangent to the graph
    v_dot_grad_H = f * eps * np.einsum("...i,...i->...", du, grad_H)
    ricci_nn = ambient_ricci_normal(model, h, c, fiber_ricci)
    n_of_phi = eps * warp.d2f(h) * c
    value = (
        -eps * n * v_dot_grad_H
        - eps * bundle.eta.values * (ricci_nn + bundle.A_norm2.values)
        - n * (eps * bundle.H.values * warp.df(h) + n_of_phi)
    )
    return ScalarField(bundle.grid, value)


@dataclass(frozen=True)
class ScalarCurvature:
    """Scalar curvature from the Gauss equation.

    ``K`` is set for n = 2; ``K_remark`` (hyperbolic model, n = 2 only) is
    ``2H^2 - 1 - |A|^2/2`` and ``remark_discrepancy`` its max relative gap
    to ``K``.
    """

    R: ScalarField
    K: ScalarField | None
    K_remark: ScalarField | None
    remark_discrepancy: float | None


def _relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / scale))


def scalar_curvature(bundle: GeometryBundle) -> ScalarCurvature:
    """Scalar curvature ``R = n(n-1)(1 - H2)`` (steady state) or ``n(n-1)(H2 - 1)`` (hyperbolic).

    Raises
    ------
    UnsupportedError
        For n = 1 or an ambient that is not a space form.
    """
    if bundle.n < 2:
        raise UnsupportedError("scalar curvature needs n >= 2")
    if bundle.R_scal is None:
        raise UnsupportedError(f"no Gauss-equation scalar curvature for warp {bundle.model.warp.kind.value!r}")
    grid = bundle.grid
    K = K_remark = gap = None
    if bundle.n == 2:
        K = ScalarField(grid, bundle.R_scal.values / 2.0)
        if bundle.model.epsilon == 1 and bundle.model.constant_curvature == -1.0:
            H = bundle.H.values
            remark = 2.0 * H**2 - 1.0 - 0.5 * bundle.A_norm2.values
            K_remark = ScalarField(grid, remark)
            gap = _relative_gap(K.values, remark)
    return ScalarCurvature(bundle.R_scal, K, K_remark, gap)


@dataclass(frozen=True)
class RicciBound:
    bound: float
    min_margin: float
    worst_point: tuple[int, ...]


def ricci_lower_bound_check(bundle: GeometryBundle, K: np.ndarray | ScalarField | None = None) -> RicciBound:
    """Compare ``Ric = K g`` (n = 2) with the bound ``(n-1) - n^2 H^2 / 4``.

    The bound uses ``max H^2``; ``min_margin = min(K - bound/(n-1))``.
    ``K`` may be overridden, which is how negative controls are run.
    """
    if not bundle.model.is_lorentzian:
        raise UnsupportedError("the Ricci estimate is stated for spacelike graphs")
    if bundle.n != 2:
        raise UnsupportedError("n=2 required for the Ricci estimate")
    n = bundle.n
    if K is None:
        if bundle.K is None:
            raise UnsupportedError("Gaussian curvature unavailable for this ambient")
        K = bundle.K.values
    K = np.asarray(K, dtype=float)
    mask = comparison_mask(bundle.grid)
    H2max = float(np.max(bundle.H.values[mask] ** 2))
    bound = (n - 1) - n**2 * H2max / 4.0
    margin = np.where(mask, K - bound / (n - 1), np.inf)
    worst = np.unravel_index(int(np.argmin(margin)), margin.shape)
    return RicciBound(bound, float(margin[worst]), tuple(int(i) for i in worst))


def hyperbolic_angle(bundle: GeometryBundle, tol: float = 1e-12) -> ScalarField:
    """``theta = arccosh(-<N, dt>)`` for a spacelike graph with ``<N, dt> < 0``.

    Raises
    ------
    UnsupportedError
        Outside the Lorentzian model.
    WarpGraphError
        If ``-<N, dt> < 1 - tol`` somewhere.
    """
    if not bundle.model.is_lorentzian:
        raise UnsupportedError("hyperbolic angle is defined for spacelike graphs only")
    cosh = -bundle.normal_t.values
    bad = cosh < 1.0 - tol
    if np.any(bad):
        point = tuple(int(i) for i in np.argwhere(bad)[0])
        raise WarpGraphError(f"-<N, dt> < 1 at {point}: normal is not future pointing or graph not spacelike")
    return ScalarField(bundle.grid, np.arccosh(np.maximum(cosh, 1.0)))
