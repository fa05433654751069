"""Numerical checks on the ambient connection and the conformal field ``V = f dt``."""

from __future__ import annotations

import numpy as np

from .fields import ScalarField
from .models import WarpedModel, ambient_christoffel, ambient_metric


def _default_step(t_field: ScalarField) -> float:
    return min(t_field.grid.spacing)


def metric_compatibility_residual(model: WarpedModel, t_field: ScalarField, step: float | None = None) -> float:
    """Max-norm of ``d_c g_ab - Gamma^d_ca g_db - Gamma^d_cb g_ad``.

    The t-derivative of the metric is a central difference with ``step``;
    the metric does not depend on the fiber coordinates.
    """
    step = _default_step(t_field) if step is None else step
    t = t_field.values
    g = ambient_metric(model, t)
    gamma = ambient_christoffel(model, t)
    dg = np.zeros(g.shape + (model.fiber_dim + 1,))
    dg[..., 0] = (ambient_metric(model, t + step) - ambient_metric(model, t - step)) / (2.0 * step)
    # lower[..., c, a, d] = Gamma^e_{ca} g_{ed}
    lower = np.einsum("...eca,...ed->...cad", gamma, g)
    residual = np.moveaxis(dg, -1, -3) - lower - np.swapaxes(lower, -1, -2)
    return float(np.max(np.abs(residual)))


def conformality_residual(
    model: WarpedModel,
    t_field: ScalarField,
    step: float | None = None,
    perturbation: float = 0.0,
) -> float:
    """Max-norm of ``<D_a V, e_b> + <e_a, D_b V> - 2 f' <e_a, e_b>`` over coordinate frames.

    ``V = (f + perturbation) dt`` is sampled at heights ``t_field`` and its
    t-derivative is taken by central difference with ``step`` (defaults to
    the smallest grid spacing). A nonzero ``perturbation`` yields a field
    that is not conformal with factor ``f'``.
    """
    step = _default_step(t_field) if step is None else step
    t = t_field.values
    n = model.fiber_dim
    warp = model.warp

    def v_t(s):
        return warp.f(s) + perturbation

    dV = np.zeros(t.shape + (n + 1, n + 1))  # dV[..., a, b] = d_b V^a
    dV[..., 0, 0] = (v_t(t + step) - v_t(t - step)) / (2.0 * step)
    V = np.zeros(t.shape + (n + 1,))
    V[..., 0] = v_t(t)
    gamma = ambient_christoffel(model, t)
    # cov[..., a, b] = (D_b V)^a
    cov = dV + np.einsum("...abc,...c->...ab", gamma, V)
    g = ambient_metric(model, t)
    # lie[..., a, b] = <D_a V, e_b> + <e_a, D_b V>
    half = np.einsum("...cb,...ca->...ab", g, cov)
    lie = half + np.swapaxes(half, -1, -2)
    residual = lie - 2.0 * warp.df(t)[..., None, None] * g
    return float(np.max(np.abs(residual)))
