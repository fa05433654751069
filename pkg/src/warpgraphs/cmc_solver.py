"""Constant mean curvature graphs: Dirichlet solver and closed-form generators.

The solver drives ``H[u] - H0`` to zero on the interior of a Dirichlet grid
with a damped Newton iteration. The Jacobian is assembled column-group by
column-group from finite-difference directional derivatives of the mean
curvature operator (one probe direction per stencil colour), then each
Newton system is solved with a sparse direct factorisation.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, SpacelikeConeError, ValidityError, WarpGraphError
from .graph_geometry import GraphSurface, Orientation, mean_curvature_values
from .warp_core import Grid, ScalarField, WarpedModel

log = logging.getLogger(__name__)

DAMPING_FLOOR = 2.0**-10


@dataclass(frozen=True)
class SolveConfig:
    """Parameters of one Dirichlet CMC solve.

    Only the boundary samples of ``boundary_data`` are used.
    """

    H_target: float
    boundary_data: ScalarField
    max_iters: int = 25
    newton_tol: float = 1e-10
    damping: float = 1.0

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise WarpGraphError("newton_tol must be positive")
        if self.max_iters < 1:
            raise WarpGraphError("max_iters must be at least 1")
        if not 0 < self.damping <= 1:
            raise WarpGraphError("damping must lie in (0, 1]")


@dataclass
class SolverReport:
    H_target: float
    converged: bool = False
    iterations: int = 0
    final_residual: float = float("nan")
    residual_history: list[float] = field(default_factory=list)
    damping_history: list[float] = field(default_factory=list)
    message: str = ""

    def to_text(self) -> str:
        lines = [
            f"H_target={self.H_target!r}",
            f"converged={str(self.converged).lower()}",
            f"iterations={self.iterations}",
            f"final_residual={self.final_residual:.6e}",
            "residual_history=" + ",".join(f"{r:.6e}" for r in self.residual_history),
            "damping_history=" + ",".join(repr(d) for d in self.damping_history),
            f"message={self.message}",
        ]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SolveResult:
    surface: GraphSurface
    report: SolverReport


def default_orientation(model: WarpedModel) -> Orientation:
    """Orientation making slices of the exponential models have H = 1."""
    return Orientation.ETA_NEGATIVE


def harmonic_extension(boundary: ScalarField) -> np.ndarray:
    """Solve the flat Laplace equation with the boundary samples as Dirichlet data."""
    grid = boundary.grid
    interior = grid.interior_mask(1)
    index = -np.ones(grid.extents, dtype=int)
    index[interior] = np.arange(int(interior.sum()))
    u = np.where(interior, 0.0, boundary.values)
    rows, cols, vals = [], [], []
    rhs = np.zeros(int(interior.sum()))
    points = np.argwhere(interior)
    for axis in range(grid.dim):
        w = 1.0 / grid.spacing[axis] ** 2
        for step in (-1, 1):
            nb = points.copy()
            nb[:, axis] += step
            nb_idx = index[tuple(nb.T)]
            own = index[tuple(points.T)]
            inside = nb_idx >= 0
            rows.extend(own[inside])
            cols.extend(nb_idx[inside])
            vals.extend([w] * int(inside.sum()))
            np.subtract.at(rhs, own[~inside], w * u[tuple(nb[~inside].T)])
        own = index[tuple(points.T)]
        rows.extend(own)
        cols.extend(own)
        vals.extend([-2.0 * w] * len(own))
    size = len(rhs)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    u[interior] = spla.spsolve(A.tocsc(), rhs)
    return u


class _CMCProblem:
    def __init__(self, model, grid, H_target, orientation):
        self.model = model
        self.grid = grid
        self.H_target = H_target
        self.orientation = orientation
        self.interior = grid.interior_mask(1)
        self.points = np.argwhere(self.interior)
        self.size = len(self.points)

    def residual(self, u: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            H = mean_curvature_values(self.model, self.grid, u, self.orientation)
        return H[self.interior] - self.H_target

    def valid(self, u: np.ndarray) -> bool:
        if not np.all(np.isfinite(u)):
            return False
        try:
            return GraphSurface.from_height(self.model, ScalarField(self.grid, u)).is_valid
        except WarpGraphError:
            return False

    def jacobian(self, u: np.ndarray) -> sp.csr_matrix:
        """Sparse Jacobian from central-difference probes, one per stencil colour."""
        dim = self.grid.dim
        index = -np.ones(self.grid.extents, dtype=int)
        index[self.interior] = np.arange(self.size)
        offsets = list(itertools.product((-1, 0, 1), repeat=dim))
        rows, cols, vals = [], [], []
        colour_of = np.mod(self.points, 3) @ (3 ** np.arange(dim))
        for colour in range(3**dim):
            chosen = colour_of == colour
            if not np.any(chosen):
                continue
            probe = np.zeros(self.grid.extents)
            probe[tuple(self.points[chosen].T)] = 1.0
            delta = 1e-6 * max(1.0, float(np.max(np.abs(u))))
            column = (self.residual(u + delta * probe) - self.residual(u - delta * probe)) / (2.0 * delta)
            # each residual point sees at most one probed unknown in its 3^dim stencil
            for off in offsets:
                src = self.points - np.asarray(off)
                ok = np.all((src >= 0) & (src < np.asarray(self.grid.extents)), axis=1)
                src_idx = np.full(self.size, -1)
                src_idx[ok] = index[tuple(src[ok].T)]
                hit = ok & (src_idx >= 0)
                hit[hit] = colour_of[src_idx[hit]] == colour
                rows.extend(np.nonzero(hit)[0])
                cols.extend(src_idx[hit])
                vals.extend(column[hit])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.size, self.size))


def solve_cmc(model: WarpedModel, grid: Grid, cfg: SolveConfig, orientation=None) -> SolveResult:
    """Solve ``H[u] = H_target`` on the interior of a Dirichlet grid.

    Starts from the harmonic extension of the boundary data. Each Newton
    step is damped: the step length halves while the residual sup-norm
    would increase or the iterate would stop being a valid graph, down to
    ``2**-10`` before giving up.

    Raises
    ------
    SpacelikeConeError
        If no admissible damping keeps the iterate valid (message contains
        "left the spacelike cone").
    ConvergenceError
        If the residual is still above ``newton_tol`` after ``max_iters``.
    """
    if grid.periodic:
        raise WarpGraphError("solve_cmc needs a Dirichlet grid")
    if cfg.boundary_data.grid != grid:
        raise WarpGraphError("boundary data lives on a different grid")
    orientation = default_orientation(model) if orientation is None else Orientation.parse(orientation)
    model.check_heights(cfg.boundary_data.values[grid.boundary_mask()])
    problem = _CMCProblem(model, grid, float(cfg.H_target), orientation)
    report = SolverReport(H_target=float(cfg.H_target))

    u = harmonic_extension(cfg.boundary_data)
    if not problem.valid(u):
        report.message = "initial guess left the spacelike cone"
        raise SpacelikeConeError("initial guess left the spacelike cone", float("inf"), report)
    res = problem.residual(u)
    norm = float(np.max(np.abs(res)))
    report.residual_history.append(norm)

    while norm > cfg.newton_tol:
        if report.iterations >= cfg.max_iters:
            report.final_residual = norm
            report.message = f"no convergence after {cfg.max_iters} iterations"
            raise ConvergenceError(report.message, norm, report)
        J = problem.jacobian(u)
        step = spla.spsolve(J.tocsc(), -res)
        update = np.zeros(grid.extents)
        update[problem.interior] = step
        damping = cfg.damping
        stayed_valid = False
        while True:
            trial = u + damping * update
            if problem.valid(trial):
                stayed_valid = True
                trial_res = problem.residual(trial)
                trial_norm = float(np.max(np.abs(trial_res)))
                if np.isfinite(trial_norm) and trial_norm <= norm:
                    break
            damping /= 2.0
            if damping < DAMPING_FLOOR:
                report.final_residual = norm
                if not stayed_valid and problem.model.is_lorentzian:
                    report.message = "left the spacelike cone"
                    raise SpacelikeConeError("every damped step left the spacelike cone", norm, report)
                report.message = "line search failed to reduce the residual"
                raise ConvergenceError(report.message, norm, report)
        u, res, norm = trial, trial_res, trial_norm
        report.iterations += 1
        report.damping_history.append(damping)
        report.residual_history.append(norm)
        log.debug("newton %d: residual %.3e damping %g", report.iterations, norm, damping)

    report.converged = True
    report.final_residual = norm
    report.message = "converged"
    return SolveResult(GraphSurface.from_height(model, ScalarField(grid, u)), report)


def make_slice(model: WarpedModel, grid: Grid, t0: float) -> GraphSurface:
    """The slice ``u = t0``."""
    return GraphSurface.from_height(model, ScalarField(grid, np.full(grid.extents, float(t0))))


def make_perturbed(model: WarpedModel, grid: Grid, t0: float, amplitude: float, mode) -> GraphSurface:
    """``u = t0 + amplitude * prod_i sin(mode_i x_i)``.

    Raises
    ------
    ValidityError
        If the graph is not valid somewhere; use a smaller amplitude.
    """
    mode = np.broadcast_to(np.asarray(mode, dtype=float), (grid.dim,))
    coords = grid.coordinates()
    wave = np.ones(grid.extents)
    for k, x in zip(mode, coords):
        wave = wave * np.sin(k * x)
    surface = GraphSurface.from_height(model, ScalarField(grid, t0 + amplitude * wave))
    point = surface.first_invalid_point()
    if point is not None:
        raise ValidityError(point, f"perturbation of amplitude {amplitude} is not a valid graph; use a smaller amplitude")
    return surface


def umbilic_height(model: WarpedModel, grid: Grid, H: float, radius: float, center, shift: float = 0.0) -> np.ndarray:
    """Height function of a totally umbilic graph with mean curvature ``H``.

    With ``y = e^{-t}`` both exponential models are conformal to a flat
    half-space (Euclidean for eps = +1, Minkowski for eps = -1), and their
    umbilic hypersurfaces are Euclidean spheres, resp. Minkowski
    hyperboloids ``(y - y_c)^2 + eps |x - c|^2 = radius^2``. The sheet
    ``y = s (sqrt(radius^2 - eps |x - c|^2) - H radius)`` has mean curvature
    ``H`` for the eta < 0 orientation, with ``s = +1`` when ``H < 1``
    (``H <= 1`` in the Lorentzian model) and ``s = -1`` otherwise.

    ``shift`` moves the surface by the ambient isometry
    ``(t, x) -> (t + shift, e^{-shift} x)``, which keeps H and ``<N, dt>``
    and raises the height by ``shift`` at corresponding points. In the
    half-space picture it scales radius and center by ``e^{-shift}``.
    """
    if model.warp.kind.value != "exponential":
        raise WarpGraphError("umbilic graphs are tabulated for f = e^t only")
    eps = model.epsilon
    upper = H < 1.0 or (model.is_lorentzian and H == 1.0)
    s = 1.0 if upper else -1.0
    scale = float(np.exp(-shift))
    radius = radius * scale
    center = scale * np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    rho2 = sum((x - c) ** 2 for x, c in zip(grid.coordinates(), center))
    inside = radius**2 - eps * rho2
    if np.any(inside <= 0):
        raise WarpGraphError("grid reaches past the equator of the sphere; use a larger radius")
    y = s * (np.sqrt(inside) - H * radius)
    if np.any(y <= 0):
        raise WarpGraphError("umbilic sheet leaves the half-space on this grid; move the center or change the radius")
    return -np.log(y)


def make_umbilic(model: WarpedModel, grid: Grid, H: float, radius: float = 3.0, center=0.5,
                 shift: float = 0.0) -> GraphSurface:
    """Closed-form CMC graph (totally umbilic), see :func:`umbilic_height`."""
    u = umbilic_height(model, grid, H, radius, center, shift)
    surface = GraphSurface.from_height(model, ScalarField(grid, u))
    surface.require_valid()
    return surface
