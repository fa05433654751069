"""Pointwise extrinsic and intrinsic geometry of a vertical graph."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import WarpGraphError
from ..warp_core import (
    Grid,
    ScalarField,
    SymTensorField,
    TensorField,
    VectorField,
    WarpedModel,
    ambient_christoffel,
    ambient_metric,
    write_field_csv,
)
from ..warp_core.finite_diff import gradient, hessian
from .surface import GraphSurface, Orientation, check_eta_sign, induced_metric, orientation_sign


def _normal_and_second_form(model: WarpedModel, u: np.ndarray, du: np.ndarray, d2u: np.ndarray, sign: int):
    """Unit normal (ambient components) and ``b_ij = <N, D_i d_j psi>``."""
    eps = model.epsilon
    n = model.fiber_dim
    f = model.warp.f(u)
    grad2 = np.sum(du**2, axis=-1)
    w = np.sqrt(1.0 + eps * grad2 / f**2)
    normal = np.empty(u.shape + (n + 1,))
    normal[..., 0] = sign / w
    normal[..., 1:] = (-sign * eps / (f**2 * w))[..., None] * du

    # tangent[..., a, i] = d_i psi^a for psi = (u, x)
    tangent = np.zeros(u.shape + (n + 1, n))
    tangent[..., 0, :] = du
    tangent[..., 1:, :] = np.eye(n)
    gamma = ambient_christoffel(model, u)
    accel = np.einsum("...abc,...bi,...cj->...aij", gamma, tangent, tangent)
    accel[..., 0, :, :] += d2u
    normal_lower = np.einsum("...ab,...b->...a", ambient_metric(model, u), normal)
    b = np.einsum("...a,...aij->...ij", normal_lower, accel)
    return normal, 0.5 * (b + np.swapaxes(b, -1, -2))


def mean_curvature_values(model: WarpedModel, grid: Grid, u: np.ndarray, orientation=Orientation.ETA_NEGATIVE):
    """Mean curvature ``H = eps tr(A) / n`` of the graph of ``u`` (array in, array out).

    Same discretization as :func:`build_bundle`, without the spectral part;
    this is the operator the CMC solver drives to a constant.
    """
    du = gradient(u, grid)
    d2u = hessian(u, grid)
    sign = orientation_sign(model, orientation)
    _, b = _normal_and_second_form(model, u, du, d2u, sign)
    g = induced_metric(model, du, model.warp.f(u))
    trace = np.einsum("...ii->...", np.linalg.solve(g, b))
    return model.epsilon * trace / model.fiber_dim


@dataclass(frozen=True, eq=False)
class GeometryBundle:
    """Every pointwise geometric quantity of a graph, computed once.

    ``shape`` holds the shape operator with mixed indices ``A^i_j``;
    ``normal`` the ambient components ``(N^t, N^1, ..., N^n)`` of the unit
    normal. Fields that make no sense for the model or dimension are None:
    ``H2`` for n = 1, ``theta`` outside the Lorentzian model with
    ``<N, dt> < 0``, ``R_scal`` when the ambient is not a space form, ``K``
    unless n = 2.
    """

    surface: GraphSurface
    orientation: Orientation
    g: SymTensorField
    g_inv: SymTensorField
    second_form: SymTensorField
    shape: TensorField
    normal: np.ndarray
    principal_curvatures: np.ndarray
    normal_t: ScalarField
    H: ScalarField
    H2: ScalarField | None
    A_norm2: ScalarField
    eta: ScalarField
    h: ScalarField
    grad_h: VectorField
    grad_h_norm2: ScalarField
    theta: ScalarField | None
    R_scal: ScalarField | None
    K: ScalarField | None

    @property
    def model(self) -> WarpedModel:
        return self.surface.model

    @property
    def grid(self) -> Grid:
        return self.surface.grid

    @property
    def n(self) -> int:
        return self.surface.model.fiber_dim


def _principal_curvatures(g: np.ndarray, b: np.ndarray) -> np.ndarray:
    # eigenvalues of g^{-1} b via the symmetric matrix L^{-1} b L^{-T}, g = L L^T
    chol = np.linalg.cholesky(g)
    left = np.linalg.solve(chol, b)
    sym = np.linalg.solve(chol, np.swapaxes(left, -1, -2))
    sym = 0.5 * (sym + np.swapaxes(sym, -1, -2))
    return np.linalg.eigvalsh(sym)


def _second_symmetric(lam: np.ndarray) -> np.ndarray:
    n = lam.shape[-1]
    total = np.zeros(lam.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            total += lam[..., i] * lam[..., j]
    return total


def gauss_scalar_curvature(model: WarpedModel, H2: np.ndarray) -> np.ndarray | None:
    """``R = n(n-1)(c + eps H2)`` for a space-form ambient of curvature ``c``."""
    c = model.constant_curvature
    n = model.fiber_dim
    if c is None or n < 2:
        return None
    return n * (n - 1) * (c + model.epsilon * H2)


def build_bundle(surface: GraphSurface, orientation=Orientation.ETA_NEGATIVE) -> GeometryBundle:
    """Compute the geometry bundle of a valid graph.

    The shape operator is ``A v = -(D_v N)^T``, recovered from
    ``b_ij = <N, D_{d_i} d_j psi>`` with the ambient Christoffel symbols and
    finite-difference derivatives of ``u``. The height gradient is the
    tangential projection ``eps dt - <N, dt> N`` written in graph coordinates.

    Raises
    ------
    ValidityError
        If the induced metric is degenerate or indefinite somewhere.
    OrientationError
        If ``ETA_NEGATIVE`` is requested and eta fails to be negative.
    """
    orientation = Orientation.parse(orientation)
    surface.require_valid()
    model, grid = surface.model, surface.grid
    eps, n = model.epsilon, model.fiber_dim
    u = surface.u.values
    du = gradient(u, grid)
    d2u = hessian(u, grid)
    sign = orientation_sign(model, orientation)
    normal, b = _normal_and_second_form(model, u, du, d2u, sign)

    f = model.warp.f(u)
    g = induced_metric(model, du, f)
    g_inv = np.linalg.inv(g)
    g_inv = 0.5 * (g_inv + np.swapaxes(g_inv, -1, -2))
    shape = g_inv @ b
    lam = _principal_curvatures(g, b)

    H = eps * np.einsum("...ii->...", shape) / n
    A_norm2 = np.einsum("...ij,...ji->...", shape, shape)
    H2 = 2.0 * _second_symmetric(lam) / (n * (n - 1)) if n >= 2 else None

    normal_t = eps * normal[..., 0]
    eta = f * normal_t
    if orientation is Orientation.ETA_NEGATIVE:
        check_eta_sign(eta)
    grad_h = -normal_t[..., None] * normal[..., 1:]
    grad_h_norm2 = np.einsum("...i,...ij,...j->...", grad_h, g, grad_h)

    theta = None
    if model.is_lorentzian and np.all(normal_t < 0):
        theta = np.arccosh(np.maximum(-normal_t, 1.0))

    R = gauss_scalar_curvature(model, H2) if H2 is not None else None
    K = R / 2.0 if (R is not None and n == 2) else None

    def scalar(a):
        return None if a is None else ScalarField(grid, a)

    normal.flags.writeable = False
    lam.flags.writeable = False
    return GeometryBundle(
        surface=surface,
        orientation=orientation,
        g=SymTensorField(grid, g),
        g_inv=SymTensorField(grid, g_inv),
        second_form=SymTensorField(grid, b),
        shape=TensorField(grid, shape),
        normal=normal,
        principal_curvatures=lam,
        normal_t=scalar(normal_t),
        H=scalar(H),
        H2=scalar(H2),
        A_norm2=scalar(A_norm2),
        eta=scalar(eta),
        h=surface.u,
        grad_h=VectorField(grid, grad_h),
        grad_h_norm2=scalar(grad_h_norm2),
        theta=scalar(theta),
        R_scal=scalar(R),
        K=scalar(K),
    )


SCALAR_EXPORTS = ("h", "normal_t", "H", "H2", "A_norm2", "eta", "grad_h_norm2", "theta", "R_scal", "K")


def export_bundle(bundle: GeometryBundle, directory, surface_id: str) -> list[Path]:
    """Write one CSV per field plus ``<surface_id>.manifest``.

    Vector and tensor fields are split into components named
    ``grad_h_<i>``, ``g_<i><j>`` and ``shape_<i><j>``.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if not surface_id or any(c in surface_id for c in "/\\"):
        raise WarpGraphError(f"invalid surface id {surface_id!r}")
    fields: dict[str, ScalarField] = {}
    for name in SCALAR_EXPORTS:
        value = getattr(bundle, name)
        if value is not None:
            fields[name] = value
    for i in range(bundle.n):
        fields[f"grad_h_{i}"] = bundle.grad_h.component(i)
        for j in range(bundle.n):
            if j >= i:
                fields[f"g_{i}{j}"] = bundle.g.component(i, j)
            fields[f"shape_{i}{j}"] = bundle.shape.component(i, j)
    written = [write_field_csv(field, directory / f"{surface_id}.{name}.csv") for name, field in fields.items()]
    manifest = dict(bundle.model.describe())
    manifest["orientation"] = bundle.orientation.value
    grid = bundle.grid
    manifest["extents"] = ",".join(str(e) for e in grid.extents)
    manifest["spacing"] = ",".join(repr(s) for s in grid.spacing)
    manifest["boundary"] = grid.boundary.value
    manifest["fields"] = ",".join(fields)
    path = directory / f"{surface_id}.manifest"
    path.write_text("".join(f"{k}={v}\n" for k, v in manifest.items()), encoding="utf-8")
    written.append(path)
    return written
