"""Audits of the Bernstein-type theorems' hypotheses and differential inequalities.

Each auditor evaluates, on one geometry bundle, the hypotheses of a theorem
and the identities/inequalities its proof relies on. Margins are signed:
a non-negative margin means the condition holds. Laplacians of auxiliary
functions always come from the discrete Laplace-Beltrami oracle, never from
the closed forms being checked.

The rigidity conclusions themselves rest on a maximum principle for complete
noncompact surfaces and are out of reach on a finite grid; reports say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import AuditModelError
from .graph_geometry import GeometryBundle, cmc_deviation, comparison_mask, ricci_lower_bound_check
from .graph_geometry.formulas import default_cmc_tol
from .warp_core import ScalarField, WarpKind, laplace_beltrami_oracle, tol_grid

POINTWISE_TOL = 1e-10
REMARK_TOL = 1e-12
SCOPE_NOTE = (
    "Only the premises are audited; the step from the differential inequality "
    "to rigidity needs a maximum principle on a complete surface and is not simulated."
)


class TheoremId(str, Enum):
    STEADY_STATE_41 = "SteadyState41"
    STEADY_STATE_BERNSTEIN_43 = "SteadyStateBernstein43"
    HYPERBOLIC_51 = "Hyperbolic51"
    HYPERBOLIC_BERNSTEIN_52 = "HyperbolicBernstein52"

    @classmethod
    def parse(cls, value) -> "TheoremId":
        if isinstance(value, TheoremId):
            return value
        key = str(value).strip()
        short = {"41": cls.STEADY_STATE_41, "43": cls.STEADY_STATE_BERNSTEIN_43,
                 "51": cls.HYPERBOLIC_51, "52": cls.HYPERBOLIC_BERNSTEIN_52}
        if key in short:
            return short[key]
        for member in cls:
            if member.value.lower() == key.lower():
                return member
        raise AuditModelError(f"unknown theorem id {value!r}")


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    worst_point: tuple[int, ...]
    margin: float
    tolerance: float


@dataclass
class AuditReport:
    theorem_id: TheoremId
    hypothesis_results: dict[str, CheckResult] = field(default_factory=dict)
    inequality_results: dict[str, CheckResult] = field(default_factory=dict)
    advisory: dict[str, float] = field(default_factory=dict)
    conclusion_notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        """``pass`` if everything holds, ``partial`` if a hypothesis fails,
        ``fail`` if all hypotheses hold but a derived inequality does not."""
        if not all(c.holds for c in self.hypothesis_results.values()):
            return "partial"
        if not all(c.holds for c in self.inequality_results.values()):
            return "fail"
        return "pass"

    def to_text(self) -> str:
        out = [f"theorem={self.theorem_id.value}"]
        for section, checks in (("hypothesis", self.hypothesis_results), ("inequality", self.inequality_results)):
            for name, c in checks.items():
                out.append("")
                out.append(f"[{section}]")
                out.append(f"name={name}")
                out.append(f"holds={str(c.holds).lower()}")
                out.append(f"margin={_fmt(c.margin)}")
                out.append(f"tolerance={_fmt(c.tolerance)}")
                out.append("worst_point=" + ",".join(str(i) for i in c.worst_point))
        for name, value in self.advisory.items():
            out.append("")
            out.append("[advisory]")
            out.append(f"name={name}")
            out.append(f"value={_fmt(value)}")
        for note in self.conclusion_notes:
            out.append("")
            out.append(f"note={note}")
        out.append("")
        out.append(f"VERDICT {self.theorem_id.value} {self.verdict}")
        return "\n".join(out) + "\n"


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6e}"


class _Auditor:
    """Collects checks over the comparison points of one bundle."""

    def __init__(self, bundle: GeometryBundle, theorem: TheoremId, tol: float | None):
        self.bundle = bundle
        self.mask = comparison_mask(bundle.grid)
        self.tol = tol_grid(bundle.grid) if tol is None else tol
        self.report = AuditReport(theorem)

    def _check(self, margins: np.ndarray, tol: float) -> CheckResult:
        margins = np.where(self.mask, np.broadcast_to(margins, self.mask.shape), np.inf)
        flat = int(np.argmin(margins))
        worst = tuple(int(i) for i in np.unravel_index(flat, margins.shape))
        margin = float(margins[worst])
        return CheckResult(bool(margin >= -tol), worst, margin, tol)

    def hypothesis(self, name, margins, tol=POINTWISE_TOL):
        self.report.hypothesis_results[name] = self._check(margins, tol)

    def inequality(self, name, margins, tol=POINTWISE_TOL):
        self.report.inequality_results[name] = self._check(margins, tol)

    def equality(self, name, lhs, rhs, tol):
        self.inequality(name, -np.abs(lhs - rhs), tol)

    def constant_mean_curvature(self):
        tol_H = default_cmc_tol(self.bundle)
        deviation = cmc_deviation(self.bundle)
        H = self.bundle.H.values
        margins = tol_H - np.abs(H - H[self.mask].mean())
        # the reported margin is relative to tol_H, so it must hold with no extra slack
        self.hypothesis("constant_mean_curvature", margins, 0.0)
        return deviation <= tol_H

    def laplacian(self, values: np.ndarray) -> np.ndarray:
        return laplace_beltrami_oracle(self.bundle.g, ScalarField(self.bundle.grid, values)).values


def _growth_margin(h: np.ndarray, log_argument: np.ndarray, tol_angle: float) -> np.ndarray:
    """Margin of ``h <= -log(arg)``; points with ``arg <= tol_angle`` count as +inf."""
    safe = np.where(log_argument > tol_angle, log_argument, 1.0)
    return np.where(log_argument > tol_angle, -np.log(safe) - h, np.inf)


def _require(bundle: GeometryBundle, *, lorentzian: bool, n2: bool = False):
    model = bundle.model
    if model.warp.kind is not WarpKind.EXPONENTIAL or model.is_lorentzian != lorentzian:
        wanted = "steady state (eps=-1)" if lorentzian else "hyperbolic (eps=+1)"
        raise AuditModelError(f"theorem needs the {wanted} model with f=e^t")
    if not np.all(bundle.normal_t.values < 0):
        raise AuditModelError("theorem needs the orientation with <N, dt> < 0 (eta < 0)")
    if n2 and bundle.n != 2:
        raise AuditModelError("n=2 required")


def audit_steady_state_41(bundle: GeometryBundle, tol: float | None = None) -> AuditReport:
    """Growth-bound theorem in the steady state space (H >= 1 forces H = 1)."""
    _require(bundle, lorentzian=True)
    a = _Auditor(bundle, TheoremId.STEADY_STATE_41, tol)
    n = bundle.n
    h, eta, H = bundle.h.values, bundle.eta.values, bundle.H.values
    cosh = -bundle.normal_t.values
    g = -np.exp(h) - eta

    is_cmc = a.constant_mean_curvature()
    a.hypothesis("mean_curvature_at_least_one", H - 1.0)
    a.hypothesis("height_nonnegative", h)
    a.hypothesis("growth_bound", _growth_margin(h, cosh - 1.0, tol_grid(bundle.grid)))

    a.inequality("g_nonnegative", g, a.tol)
    a.inequality("g_at_most_one", 1.0 - g)
    lap_g = a.laplacian(g)
    if n >= 2:
        gap = H**2 - bundle.H2.values
        a.inequality("cauchy_schwarz", gap)
        key = n * (H - 1.0) * (-np.exp(h) - H * eta) - n * (n - 1) * gap * eta
        a.equality("laplacian_g_identity", lap_g, key, a.tol)
        a.inequality("laplacian_g_linear_bound", lap_g - (n * (H - 1.0) * g + n * (n - 1) * gap), a.tol)
    a.inequality("laplacian_g_quadratic_bound", lap_g - n * (H - 1.0) * g**2, a.tol)

    if n >= 2 and np.max(np.abs(H[a.mask] - 1.0)) <= default_cmc_tol(bundle):
        R = bundle.R_scal.values
        a.inequality("laplacian_g_scalar_curvature_bound", lap_g - R, a.tol)
        a.inequality("scalar_curvature_nonnegative", R)
    else:
        a.report.conclusion_notes.append("H is not identically 1: the scalar curvature part was not evaluated")
    if n == 2:
        ricci = ricci_lower_bound_check(bundle)
        a.inequality("ricci_lower_bound", bundle.K.values - ricci.bound / (n - 1), a.tol)
        a.report.advisory["ricci_bound"] = ricci.bound
    else:
        a.report.conclusion_notes.append("Ricci estimate audited for n=2 only")

    grad = np.sqrt(bundle.grad_h_norm2.values)
    remark = np.exp(-h / 2.0) - grad
    a.report.advisory["gradient_remark_margin"] = float(np.min(remark[a.mask]))
    if n >= 2 and bundle.R_scal is not None:
        a.report.advisory["inf_abs_R"] = float(np.min(np.abs(bundle.R_scal.values[a.mask])))
    if not is_cmc:
        a.report.conclusion_notes.append("H is not constant: the Laplacian-of-g identity does not apply")
    a.report.conclusion_notes.append(SCOPE_NOTE)
    return a.report


def audit_steady_state_bernstein_43(bundle: GeometryBundle, tol: float | None = None) -> AuditReport:
    """Gradient-bound Bernstein theorem for surfaces in the 3-dimensional steady state space."""
    _require(bundle, lorentzian=True, n2=True)
    a = _Auditor(bundle, TheoremId.STEADY_STATE_BERNSTEIN_43, tol)
    h, H, c = bundle.h.values, bundle.H.values, bundle.normal_t.values
    grad2 = bundle.grad_h_norm2.values
    K = bundle.K.values

    a.constant_mean_curvature()
    a.hypothesis("mean_curvature_at_least_one", H - 1.0)
    a.hypothesis("gaussian_curvature_nonnegative", K, a.tol)
    a.hypothesis("gradient_bound", H**2 - 1.0 - grad2)

    bracket = grad2 + 1.0 + H * c
    a.inequality("gradient_bound_equivalent", -bracket)
    formula = 2.0 * np.exp(-h) * bracket
    lap = a.laplacian(np.exp(-h))
    a.equality("laplacian_exp_minus_h_identity", lap, formula, a.tol)
    a.inequality("superharmonic", -lap, a.tol)
    a.inequality("superharmonic_formula", -formula)
    a.report.advisory["max_laplacian_exp_minus_h_formula"] = float(np.max(formula[a.mask]))
    a.report.conclusion_notes.append(SCOPE_NOTE)
    return a.report


def audit_hyperbolic_51(bundle: GeometryBundle, tol: float | None = None) -> AuditReport:
    """Growth-bound theorem in hyperbolic space (0 <= H <= 1 forces H = 1)."""
    _require(bundle, lorentzian=False)
    a = _Auditor(bundle, TheoremId.HYPERBOLIC_51, tol)
    n = bundle.n
    h, eta, H, c = bundle.h.values, bundle.eta.values, bundle.H.values, bundle.normal_t.values
    g = np.exp(h) + eta

    is_cmc = a.constant_mean_curvature()
    a.hypothesis("mean_curvature_in_unit_interval", np.minimum(H, 1.0 - H))
    a.hypothesis("height_nonnegative", h)
    a.hypothesis("growth_bound", _growth_margin(h, 1.0 + c, tol_grid(bundle.grid)))

    a.inequality("g_nonnegative", g, a.tol)
    a.inequality("g_at_most_one", 1.0 - g)
    lap_g = a.laplacian(g)
    if n >= 2:
        gap = H**2 - bundle.H2.values
        a.inequality("cauchy_schwarz", gap)
        key = n * (1.0 - H) * (np.exp(h) + H * eta) - n * (n - 1) * gap * eta
        a.equality("laplacian_g_identity", lap_g, key, a.tol)
        # e^h + H eta = g - (1 - H) eta, so replacing it by g drops a nonnegative term
        a.inequality("laplacian_g_linear_bound", lap_g - (n * (1.0 - H) * g - n * (n - 1) * gap * eta), a.tol)
    a.inequality("laplacian_g_quadratic_bound", lap_g - n * (1.0 - H) * g**2, a.tol)

    if n >= 2 and np.max(np.abs(H[a.mask] - 1.0)) <= default_cmc_tol(bundle):
        R = bundle.R_scal.values
        a.equality("laplacian_g_scalar_curvature_identity", lap_g, R * eta, a.tol)
        a.inequality("scalar_curvature_comparison", R * eta - R * c)
        a.inequality("scalar_curvature_nonpositive", -R)
    else:
        a.report.conclusion_notes.append("H is not identically 1: the scalar curvature part was not evaluated")

    a.report.advisory["beta_inf_minus_normal_t"] = float(np.min(-c[a.mask]))
    if bundle.R_scal is not None:
        a.report.advisory["inf_abs_R"] = float(np.min(np.abs(bundle.R_scal.values[a.mask])))
    if bundle.K is not None:
        a.report.advisory["min_K"] = float(np.min(bundle.K.values[a.mask]))
    a.report.conclusion_notes.append("Ricci lower bound is vacuous on a finite grid; min_K is reported without a verdict")
    if not is_cmc:
        a.report.conclusion_notes.append("H is not constant: the Laplacian-of-g identity does not apply")
    a.report.conclusion_notes.append(SCOPE_NOTE)
    return a.report


def audit_hyperbolic_bernstein_52(bundle: GeometryBundle, tol: float | None = None) -> AuditReport:
    """Gradient-bound Bernstein theorem for graphs in 3-dimensional hyperbolic space."""
    _require(bundle, lorentzian=False, n2=True)
    a = _Auditor(bundle, TheoremId.HYPERBOLIC_BERNSTEIN_52, tol)
    h, H, c = bundle.h.values, bundle.H.values, bundle.normal_t.values
    grad2 = bundle.grad_h_norm2.values
    K = bundle.K.values

    a.constant_mean_curvature()
    a.hypothesis("mean_curvature_range", np.minimum(H - math.sqrt(2.0) / 2.0, 1.0 - H))
    a.hypothesis("gaussian_curvature_nonnegative", K, a.tol)
    a.hypothesis("gradient_bound", 1.0 - H**2 - grad2)

    bracket = grad2 - 1.0 - H * c
    a.inequality("gradient_bound_equivalent", -bracket)
    remark = 2.0 * H**2 - 1.0 - 0.5 * bundle.A_norm2.values
    scale = np.maximum(1.0, np.maximum(np.abs(K), np.abs(remark)))
    a.inequality("gauss_remark_identity", -np.abs(K - remark) / scale, REMARK_TOL)
    formula = 2.0 * np.exp(-h) * bracket
    lap = a.laplacian(np.exp(-h))
    a.equality("laplacian_exp_minus_h_identity", lap, formula, a.tol)
    a.inequality("superharmonic", -lap, a.tol)
    a.report.conclusion_notes.append(SCOPE_NOTE)
    return a.report


AUDITORS = {
    TheoremId.STEADY_STATE_41: audit_steady_state_41,
    TheoremId.STEADY_STATE_BERNSTEIN_43: audit_steady_state_bernstein_43,
    TheoremId.HYPERBOLIC_51: audit_hyperbolic_51,
    TheoremId.HYPERBOLIC_BERNSTEIN_52: audit_hyperbolic_bernstein_52,
}


def run_audit(theorem, bundle: GeometryBundle, tol: float | None = None) -> AuditReport:
    return AUDITORS[TheoremId.parse(theorem)](bundle, tol)
