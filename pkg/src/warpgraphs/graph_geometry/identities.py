"""Oracle-versus-formula identity suite for one geometry bundle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CMCRequiredError
from ..warp_core import conformality_residual, laplace_beltrami_oracle, tol_grid
from .bundle import GeometryBundle
from .formulas import (
    CMC_TOL_FACTOR,
    comparison_mask,
    laplacian_eta_conformal,
    laplacian_eta_warped,
    laplacian_h_formula,
    scalar_curvature,
)

ALGEBRAIC_TOL = 1e-12


@dataclass(frozen=True)
class IdentityCheck:
    """One row of the identity table; ``status`` is pass, fail or skipped."""

    identity: str
    max_error: float
    tolerance: float
    status: str

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def _check(name: str, error: float, tol: float) -> IdentityCheck:
    return IdentityCheck(name, error, tol, "pass" if error <= tol else "fail")


def _sup(diff: np.ndarray, mask: np.ndarray) -> float:
    return float(np.max(np.abs(diff[mask])))


def _relative(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> float:
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return _sup((a - b) / scale, mask)


def oracle_errors(bundle: GeometryBundle, fiber_ricci: float = 0.0, tol_H: float | None = None) -> dict[str, float]:
    """Sup-norm gaps between oracle Laplacians and closed forms on the comparison points.

    ``laplacian_eta_warped`` is present only when the bundle passes the CMC
    admission test with threshold ``tol_H`` (see :func:`laplacian_eta_warped`).
    """
    mask = comparison_mask(bundle.grid)
    lap_h = laplace_beltrami_oracle(bundle.g, bundle.h).values
    lap_eta = laplace_beltrami_oracle(bundle.g, bundle.eta).values
    errors = {
        "laplacian_h": _sup(lap_h - laplacian_h_formula(bundle).values, mask),
        "laplacian_eta_conformal": _sup(lap_eta - laplacian_eta_conformal(bundle, fiber_ricci).values, mask),
    }
    try:
        warped = laplacian_eta_warped(bundle, fiber_ricci, tol_H).values
    except CMCRequiredError:
        return errors
    errors["laplacian_eta_warped"] = _sup(lap_eta - warped, mask)
    return errors


def identity_suite(bundle: GeometryBundle, tol_constant: float = 1.0) -> list[IdentityCheck]:
    """Run every identity check on a bundle, in a fixed order.

    Discretization-limited checks use ``tol_grid = C * max(spacing)^2``;
    algebraic ones use a relative ``1e-12``. Checks that do not apply to the
    bundle (non-CMC, n = 1, non-space-form ambient) are reported as skipped.

    The warped-product Laplacian of eta is only compared when H deviates
    from a constant by at most ``tol_grid``. The looser ``10 * tol_grid``
    admission of the formula itself would let coarse non-CMC grids through,
    and the dropped ``<V, grad H>`` term would then show up as a failure.
    """
    grid = bundle.grid
    mask = comparison_mask(grid)
    tol = tol_grid(grid, tol_constant)
    eps, n = bundle.model.epsilon, bundle.n
    rows: list[IdentityCheck] = []

    errors = oracle_errors(bundle, tol_H=tol)
    rows.append(_check("laplacian_h", errors["laplacian_h"], tol))
    rows.append(_check("laplacian_eta_conformal", errors["laplacian_eta_conformal"], tol))
    if "laplacian_eta_warped" in errors:
        rows.append(_check("laplacian_eta_warped", errors["laplacian_eta_warped"], tol))
        gap = _sup(laplacian_eta_warped(bundle).values - laplacian_eta_conformal(bundle).values, mask)
        rows.append(_check("eta_formulas_agree", gap, CMC_TOL_FACTOR * tol))
    else:
        rows.append(IdentityCheck("laplacian_eta_warped", float("nan"), tol, "skipped"))
        rows.append(IdentityCheck("eta_formulas_agree", float("nan"), CMC_TOL_FACTOR * tol, "skipped"))

    H, A2 = bundle.H.values, bundle.A_norm2.values
    if n >= 2:
        algebra = n**2 * H**2 - n * (n - 1) * bundle.H2.values
        rows.append(_check("shape_norm_identity", _relative(A2, algebra, mask), ALGEBRAIC_TOL))
    else:
        rows.append(IdentityCheck("shape_norm_identity", float("nan"), ALGEBRAIC_TOL, "skipped"))

    c = bundle.normal_t.values
    # |grad h|^2 = eps (1 - <N, dt>^2): c^2 - 1 when Lorentzian, 1 - c^2 when Riemannian
    rows.append(_check("gradient_normal_identity",
                       _relative(bundle.grad_h_norm2.values, eps * (1.0 - c**2), mask), ALGEBRAIC_TOL))
    if eps == -1:
        sign_violation = np.max(np.maximum(c[mask] + 1.0, 0.0))
    else:
        sign_violation = np.max(np.maximum(np.abs(c[mask]) - 1.0, 0.0))
    rows.append(_check("normal_sign_invariant", float(sign_violation), ALGEBRAIC_TOL))

    # the t-difference error is f'''(t) step^2 / 3, so the tolerance scales with sup |f'|
    residual = conformality_residual(bundle.model, bundle.h)
    scale = max(1.0, float(np.max(np.abs(bundle.model.warp.df(bundle.h.values)))))
    rows.append(_check("conformality_residual", residual, max(tol * scale, ALGEBRAIC_TOL)))

    remark = None
    if n == 2 and bundle.R_scal is not None:
        remark = scalar_curvature(bundle).remark_discrepancy
    if remark is None:
        rows.append(IdentityCheck("gauss_remark_identity", float("nan"), ALGEBRAIC_TOL, "skipped"))
    else:
        rows.append(_check("gauss_remark_identity", remark, ALGEBRAIC_TOL))
    return rows

