"""Warped-product ambient spaces ``eps dt^2 + f(t)^2 |dx|^2`` over a flat fiber."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import WarpGraphError


class WarpKind(str, Enum):
    EXPONENTIAL = "exponential"
    CONSTANT = "constant"
    COSH = "cosh"


@dataclass(frozen=True)
class WarpFamily:
    """Closed-form warping function with its first two derivatives."""

    kind: WarpKind

    def __post_init__(self):
        object.__setattr__(self, "kind", WarpKind(self.kind))

    def f(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is WarpKind.EXPONENTIAL:
            return np.exp(t)
        if self.kind is WarpKind.CONSTANT:
            return np.ones_like(t)
        return np.cosh(t)

    def df(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is WarpKind.EXPONENTIAL:
            return np.exp(t)
        if self.kind is WarpKind.CONSTANT:
            return np.zeros_like(t)
        return np.sinh(t)

    def d2f(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is WarpKind.EXPONENTIAL:
            return np.exp(t)
        if self.kind is WarpKind.CONSTANT:
            return np.zeros_like(t)
        return np.cosh(t)

    def dlogf(self, t):
        """(log f)' = f'/f."""
        t = np.asarray(t, dtype=float)
        if self.kind is WarpKind.EXPONENTIAL:
            return np.ones_like(t)
        if self.kind is WarpKind.CONSTANT:
            return np.zeros_like(t)
        return np.tanh(t)

    def d2logf(self, t):
        """(log f)'' = f''/f - (f'/f)^2."""
        t = np.asarray(t, dtype=float)
        if self.kind is WarpKind.COSH:
            return 1.0 / np.cosh(t) ** 2
        return np.zeros_like(t)


@dataclass(frozen=True)
class WarpedModel:
    """Ambient space ``eps I x_f R^n``.

    Parameters
    ----------
    epsilon : int
        Sign of ``<dt, dt>``; +1 gives a Riemannian ambient, -1 a Lorentzian one.
    warp : WarpFamily
        Warping function ``f``.
    fiber_dim : int
        Dimension ``n`` of the flat fiber (and of the graphs living in it).
    """

    epsilon: int
    warp: WarpFamily = field(default_factory=lambda: WarpFamily(WarpKind.EXPONENTIAL))
    fiber_dim: int = 2

    def __post_init__(self):
        if self.epsilon not in (-1, 1):
            raise WarpGraphError(f"epsilon must be +1 or -1, got {self.epsilon!r}")
        if not isinstance(self.warp, WarpFamily):
            object.__setattr__(self, "warp", WarpFamily(self.warp))
        if int(self.fiber_dim) != self.fiber_dim or self.fiber_dim < 1:
            raise WarpGraphError(f"fiber_dim must be a positive integer, got {self.fiber_dim!r}")
        object.__setattr__(self, "fiber_dim", int(self.fiber_dim))

    @property
    def is_lorentzian(self) -> bool:
        return self.epsilon == -1

    @property
    def constant_curvature(self) -> float | None:
        """Sectional curvature of the ambient when it is a space form, else None.

        With f = e^t the Riemannian model is hyperbolic space (-1) and the
        Lorentzian one is the steady state region of de Sitter space (+1).
        """
        if self.warp.kind is WarpKind.EXPONENTIAL:
            return float(-self.epsilon)
        if self.warp.kind is WarpKind.CONSTANT:
            return 0.0
        return None

    def check_heights(self, t) -> None:
        f = self.warp.f(t)
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise WarpGraphError("warping function is not finite and positive on the given heights")

    def describe(self) -> dict[str, str]:
        return {
            "epsilon": str(self.epsilon),
            "warp": self.warp.kind.value,
            "fiber_dim": str(self.fiber_dim),
        }


def hyperbolic_space(n: int = 2) -> WarpedModel:
    """Warped model ``R x_{e^t} R^n`` of hyperbolic space."""
    return WarpedModel(1, WarpFamily(WarpKind.EXPONENTIAL), n)


def steady_state_space(n: int = 2) -> WarpedModel:
    """Steady state space ``-R x_{e^t} R^n``."""
    return WarpedModel(-1, WarpFamily(WarpKind.EXPONENTIAL), n)


def ambient_metric(model: WarpedModel, t):
    """Ambient metric components at heights ``t``; index 0 is the t direction."""
    t = np.asarray(t, dtype=float)
    n = model.fiber_dim
    g = np.zeros(t.shape + (n + 1, n + 1))
    g[..., 0, 0] = model.epsilon
    f2 = model.warp.f(t) ** 2
    for i in range(1, n + 1):
        g[..., i, i] = f2
    return g


def ambient_christoffel(model: WarpedModel, t):
    """Christoffel symbols ``gamma[..., a, b, c] = Gamma^a_{bc}``.

    Nonzero entries: ``Gamma^t_{ij} = -eps f f' delta_ij`` and
    ``Gamma^i_{tj} = Gamma^i_{jt} = (f'/f) delta^i_j``.
    """
    t = np.asarray(t, dtype=float)
    n = model.fiber_dim
    f = model.warp.f(t)
    df = model.warp.df(t)
    gamma = np.zeros(t.shape + (n + 1, n + 1, n + 1))
    ratio = df / f
    for i in range(1, n + 1):
        gamma[..., 0, i, i] = -model.epsilon * f * df
        gamma[..., i, 0, i] = ratio
        gamma[..., i, i, 0] = ratio
    return gamma


def ambient_ricci_normal(model: WarpedModel, t, normal_t, fiber_ricci=0.0):
    """Ambient ``Ric(N, N)`` for a unit normal with ``<N, dt> = normal_t``.

    Built from the warped-product Ricci decomposition: fiber part
    ``Ric_M(N^T, N^T) - <N^T, N^T> eps (f''/f + (n-1) f'^2/f^2)`` plus the base
    part ``<N, dt>^2 Ric(dt, dt)`` with ``Ric(dt, dt) = -n f''/f``.
    ``fiber_ricci`` is ``Ric_M(N^T, N^T)``; zero for the flat fiber.
    """
    n = model.fiber_dim
    eps = model.epsilon
    f = model.warp.f(t)
    df = model.warp.df(t)
    d2f = model.warp.d2f(t)
    c2 = np.asarray(normal_t) ** 2
    tangential_norm2 = eps * (1.0 - c2)
    fiber_part = fiber_ricci - tangential_norm2 * eps * (d2f / f + (n - 1) * (df / f) ** 2)
    return fiber_part + c2 * (-n * d2f / f)
