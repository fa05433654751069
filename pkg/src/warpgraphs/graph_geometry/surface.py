"""Vertical graphs ``x -> (u(x), x)`` and the orientation conventions for them."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import OrientationError, ValidityError
from ..warp_core import Grid, ScalarField, WarpedModel
from ..warp_core.finite_diff import gradient


class Orientation(str, Enum):
    """Choice of unit normal.

    ``FUTURE_POINTING`` takes the normal with positive dt-component,
    ``PAST_POINTING`` the opposite one, and ``ETA_NEGATIVE`` whichever makes
    ``eta = <f dt, N>`` negative. In both exponential models the last one is
    the convention under which slices have mean curvature 1.
    """

    FUTURE_POINTING = "future"
    PAST_POINTING = "past"
    ETA_NEGATIVE = "eta_negative"

    @classmethod
    def parse(cls, value) -> "Orientation":
        if isinstance(value, Orientation):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "future": cls.FUTURE_POINTING,
            "future_pointing": cls.FUTURE_POINTING,
            "futurepointing": cls.FUTURE_POINTING,
            "past": cls.PAST_POINTING,
            "past_pointing": cls.PAST_POINTING,
            "pastpointing": cls.PAST_POINTING,
            "eta_negative": cls.ETA_NEGATIVE,
            "etanegative": cls.ETA_NEGATIVE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise OrientationError(f"unknown orientation {value!r}") from None


def orientation_sign(model: WarpedModel, orientation: Orientation) -> int:
    """Sign of the dt-component of the chosen unit normal."""
    orientation = Orientation.parse(orientation)
    if orientation is Orientation.FUTURE_POINTING:
        return 1
    if orientation is Orientation.PAST_POINTING:
        return -1
    # eta = f * eps * sign / W, so eta < 0 needs sign = -eps
    return -model.epsilon


def induced_metric(model: WarpedModel, du: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``g_ij = eps u_i u_j + f(u)^2 delta_ij``."""
    n = du.shape[-1]
    g = model.epsilon * du[..., :, None] * du[..., None, :]
    g = g + (f**2)[..., None, None] * np.eye(n)
    return g


@dataclass(frozen=True, eq=False)
class GraphSurface:
    """Graph of a height function over the fiber grid.

    ``validity`` marks the points where the induced metric is positive
    definite. In the Lorentzian model that is the spacelike condition
    ``|Du| < f(u)`` (Euclidean norm of the coordinate gradient), i.e. the
    gradient is shorter than one in the metric of the slice through the point.
    """

    model: WarpedModel
    u: ScalarField
    validity: np.ndarray

    @classmethod
    def from_height(cls, model: WarpedModel, u: ScalarField) -> "GraphSurface":
        if u.grid.dim != model.fiber_dim:
            raise ValueError(f"grid dimension {u.grid.dim} does not match fiber dimension {model.fiber_dim}")
        model.check_heights(u.values)
        du = gradient(u.values, u.grid)
        g = induced_metric(model, du, model.warp.f(u.values))
        validity = np.linalg.eigvalsh(g)[..., 0] > 0
        validity.flags.writeable = False
        return cls(model, u, validity)

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def is_valid(self) -> bool:
        return bool(np.all(self.validity))

    def first_invalid_point(self) -> tuple[int, ...] | None:
        bad = np.argwhere(~self.validity)
        if bad.size == 0:
            return None
        return tuple(int(i) for i in bad[0])

    def require_valid(self) -> None:
        point = self.first_invalid_point()
        if point is not None:
            kind = "spacelike" if self.model.is_lorentzian else "Riemannian"
            raise ValidityError(point, f"graph is not {kind}")


def check_eta_sign(eta: np.ndarray) -> None:
    bad = ~(eta < 0)
    if np.any(bad):
        raise OrientationError(f"eta does not stay negative (first failure at {tuple(np.argwhere(bad)[0])})")
