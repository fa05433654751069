"""Command-line front end: ``warpgraphs {verify,solve,audit,report}``.

Exit codes: 0 when every check passes, 1 when a verification, audit or
solve fails, 2 for usage, configuration or input-file errors.

Every output file is a deterministic function of the config; the only
exception is a ``# generated=<UTC time>`` first line, which
``--no-timestamp`` suppresses.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .cmc_solver import SolveConfig, SolverReport, make_perturbed, make_slice, solve_cmc, umbilic_height
from .config import (
    RunConfig,
    check_writable,
    load_config,
    param_float,
    param_floats,
    param_int,
    param_str,
)
from .errors import (
    AuditModelError,
    ConfigError,
    ConvergenceError,
    FieldFormatError,
    UnsupportedError,
    WarpGraphError,
)
from .graph_geometry import GraphSurface, build_bundle, export_bundle, identity_suite, oracle_errors
from .theorem_audit import AuditReport, TheoremId, run_audit
from .warp_core import Grid, ScalarField, WarpKind, read_field_csv, tol_grid, write_field_csv

log = logging.getLogger("warpgraphs")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CONVERGENCE_COLUMNS = ("laplacian_h", "laplacian_eta_conformal", "laplacian_eta_warped")


class UsageError(WarpGraphError):
    pass


@dataclass
class Outputs:
    """Writes text files into the run directory, with the optional timestamp header."""

    directory: Path
    timestamp: str | None

    def write(self, name: str, body: str, header: bool = True) -> Path:
        path = self.directory / name
        prefix = f"# generated={self.timestamp}\n" if (header and self.timestamp) else ""
        path.write_text(prefix + body, encoding="utf-8")
        return path


def _fmt(x: float) -> str:
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6e}"


# ---------------------------------------------------------------- surfaces


def _solve_boundary(cfg: RunConfig, grid: Grid, H_target: float) -> ScalarField:
    surface_spec = cfg.surface
    kind = param_str(surface_spec, "boundary", "constant").lower()
    model = cfg.model
    if kind == "constant":
        values = np.full(grid.extents, param_float(surface_spec, "t0", 0.0))
    elif kind == "perturbed":
        mode = param_floats(surface_spec, "mode", grid.dim, 1.0)
        values = np.full(grid.extents, param_float(surface_spec, "t0", 0.0))
        wave = np.ones(grid.extents)
        for k, x in zip(mode, grid.coordinates()):
            wave = wave * np.sin(k * x)
        values = values + param_float(surface_spec, "amplitude") * wave
    elif kind == "umbilic":
        center = param_floats(surface_spec, "center", grid.dim, [0.5 * L for L in grid.lengths])
        values = umbilic_height(model, grid, H_target, param_float(surface_spec, "radius", 3.0), center,
                                param_float(surface_spec, "shift", 0.0))
    elif kind == "file":
        field = read_field_csv(cfg.resolve(param_str(surface_spec, "path")))
        if field.grid != grid:
            raise ConfigError(f"{param_str(surface_spec, 'path')}: boundary data grid does not match the configured grid")
        values = field.values
    else:
        raise ConfigError(f"solve.boundary: unknown kind {kind!r} (constant, perturbed, umbilic, file)")
    return ScalarField(grid, values)


def make_surface(cfg: RunConfig, grid: Grid | None) -> tuple[GraphSurface, SolverReport | None]:
    """Build the configured surface on ``grid`` (ignored for file sources).

    Raises
    ------
    ConvergenceError
        When a ``solve`` source does not converge.
    """
    surface_spec, model = cfg.surface, cfg.model
    report = None
    if surface_spec.source == "slice":
        surface = make_slice(model, grid, param_float(surface_spec, "t0", 0.0))
    elif surface_spec.source == "perturbed":
        surface = make_perturbed(model, grid, param_float(surface_spec, "t0", 0.0), param_float(surface_spec, "amplitude"),
                                 param_floats(surface_spec, "mode", grid.dim, 1.0))
    elif surface_spec.source == "umbilic":
        center = param_floats(surface_spec, "center", grid.dim, [0.5 * L for L in grid.lengths])
        u = umbilic_height(model, grid, param_float(surface_spec, "H"), param_float(surface_spec, "radius", 3.0), center,
                           param_float(surface_spec, "shift", 0.0))
        surface = GraphSurface.from_height(model, ScalarField(grid, u))
    elif surface_spec.source == "file":
        path = param_str(surface_spec, "path")
        field = read_field_csv(cfg.resolve(path))
        if grid is not None and field.grid != grid:
            raise ConfigError(f"{path}: field grid does not match the configured grid")
        surface = GraphSurface.from_height(model, field)
    else:
        H_target = param_float(surface_spec, "H_target")
        if grid.periodic:
            raise ConfigError("solve needs grid.boundary = dirichlet")
        solve_cfg = SolveConfig(
            H_target=H_target,
            boundary_data=_solve_boundary(cfg, grid, H_target),
            max_iters=param_int(surface_spec, "max_iters", 25),
            newton_tol=param_float(surface_spec, "newton_tol", 1e-10),
            damping=param_float(surface_spec, "damping", 1.0),
        )
        result = solve_cmc(model, grid, solve_cfg, cfg.orientation)
        surface, report = result.surface, result.report
    surface.require_valid()
    return surface, report


def _grid(cfg: RunConfig, spacing_override: float | None) -> Grid | None:
    if spacing_override is None:
        return cfg.grid
    if cfg.grid is None:
        raise ConfigError("--spacing-override needs a grid section; file surfaces have a fixed grid")
    if not spacing_override > 0:
        raise UsageError("--spacing-override must be positive")
    return cfg.grid.with_spacing(spacing_override)


def _run_manifest(cfg: RunConfig, grid: Grid) -> str:
    entries = dict(cfg.model.describe())
    entries.update(
        surface_id=cfg.surface_id,
        source=cfg.surface.source,
        orientation=cfg.orientation.value,
        extents=",".join(str(e) for e in grid.extents),
        spacing=",".join(repr(s) for s in grid.spacing),
        max_spacing=repr(grid.max_spacing),
        boundary=grid.boundary.value,
        tol_constant=repr(cfg.tol_constant),
        tol_grid=repr(tol_grid(grid, cfg.tol_constant)),
    )
    return "".join(f"{k}={v}\n" for k, v in entries.items())


# ---------------------------------------------------------------- suites


def _write_solution(out: Outputs, cfg: RunConfig, surface: GraphSurface, report: SolverReport | None) -> None:
    write_field_csv(surface.u, out.directory / f"{cfg.surface_id}.solution.csv")
    if report is not None:
        out.write("solver_report.txt", report.to_text())


def _identities(out: Outputs, cfg: RunConfig, surface: GraphSurface) -> bool:
    bundle = build_bundle(surface, cfg.orientation)
    rows = identity_suite(bundle, cfg.tol_constant)
    lines = ["identity,max_error,tolerance,pass"]
    for r in rows:
        status = {"pass": "true", "fail": "false"}.get(r.status, r.status)
        lines.append(f"{r.identity},{_fmt(r.max_error)},{_fmt(r.tolerance)},{status}")
    out.write("summary.csv", "\n".join(lines) + "\n")
    export_bundle(bundle, out.directory / "fields", cfg.surface_id)
    failed = [r.identity for r in rows if not r.passed]
    print(f"verify: {len(rows)} identities, {len(failed)} failed" + (f" ({', '.join(failed)})" if failed else ""))

    if cfg.convergence:
        if cfg.surface.source == "file":
            raise ConfigError("verify.convergence needs a generated surface, not a file")
        coarse = surface.grid
        lines = ["spacing," + ",".join(CONVERGENCE_COLUMNS)]
        for grid in (coarse, coarse.refined(2)):
            s = surface if grid is coarse else make_surface(cfg, grid)[0]
            errors = oracle_errors(build_bundle(s, cfg.orientation), tol_H=tol_grid(grid, cfg.tol_constant))
            values = [_fmt(errors.get(c, float("nan"))) for c in CONVERGENCE_COLUMNS]
            lines.append(f"{grid.max_spacing!r}," + ",".join(values))
        out.write("convergence.csv", "\n".join(lines) + "\n")
    return not failed


def _default_theorems(cfg: RunConfig) -> tuple[TheoremId, ...]:
    model = cfg.model
    if model.warp.kind is not WarpKind.EXPONENTIAL:
        raise ConfigError("no audited theorem applies to this warp; set audit.theorems explicitly")
    if model.is_lorentzian:
        ids = (TheoremId.STEADY_STATE_41, TheoremId.STEADY_STATE_BERNSTEIN_43)
    else:
        ids = (TheoremId.HYPERBOLIC_51, TheoremId.HYPERBOLIC_BERNSTEIN_52)
    return ids if model.fiber_dim == 2 else ids[:1]


def _audits(out: Outputs, cfg: RunConfig, surface: GraphSurface) -> bool:
    bundle = build_bundle(surface, cfg.orientation)
    theorems = cfg.theorems or _default_theorems(cfg)
    # run everything first so a model mismatch leaves no partial reports behind
    reports: list[AuditReport] = [run_audit(t, bundle, tol_grid(bundle.grid, cfg.tol_constant)) for t in theorems]
    lines = ["theorem,verdict"]
    for report in reports:
        out.write(f"{report.theorem_id.value}.audit.txt", report.to_text())
        lines.append(f"{report.theorem_id.value},{report.verdict}")
        print(f"VERDICT {report.theorem_id.value} {report.verdict}")
    out.write("audit_summary.csv", "\n".join(lines) + "\n")
    return all(r.verdict == "pass" for r in reports)


def _prepare(args) -> tuple[RunConfig, Outputs, Grid | None]:
    if args.config is None:
        raise UsageError(f"{args.command} needs --config")
    cfg = load_config(args.config)
    directory = Path(args.out) if args.out else cfg.resolve(str(cfg.output_dir))
    try:
        check_writable(directory)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {directory}: {exc}") from None
    stamp = None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")
    return cfg, Outputs(directory, stamp), _grid(cfg, args.spacing_override)


def _surface_for(out: Outputs, cfg: RunConfig, grid: Grid | None) -> GraphSurface:
    try:
        surface, report = make_surface(cfg, grid)
    except ConvergenceError as exc:
        if exc.report is not None:
            out.write("solver_report.txt", exc.report.to_text())
        raise
    out.write("run.manifest", _run_manifest(cfg, surface.grid), header=False)
    if report is not None:
        _write_solution(out, cfg, surface, report)
    return surface


def cmd_verify(args) -> int:
    cfg, out, grid = _prepare(args)
    if "solver" in cfg.suites and cfg.surface.source != "solve":
        raise ConfigError("the solver suite needs a solve section")
    surface = _surface_for(out, cfg, grid)
    ok = True
    if "identities" in cfg.suites:
        ok = _identities(out, cfg, surface) and ok
    if "audits" in cfg.suites:
        ok = _audits(out, cfg, surface) and ok
    return EXIT_OK if ok else EXIT_FAIL


def cmd_solve(args) -> int:
    cfg, out, grid = _prepare(args)
    if cfg.surface.source != "solve":
        raise ConfigError("solve needs a solve section in the config")
    _surface_for(out, cfg, grid)
    print(f"solve: converged, solution written to {out.directory / (cfg.surface_id + '.solution.csv')}")
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg, out, grid = _prepare(args)
    surface = _surface_for(out, cfg, grid)
    return EXIT_OK if _audits(out, cfg, surface) else EXIT_FAIL


# ---------------------------------------------------------------- report


def _read_manifest(path: Path) -> dict[str, str]:
    entries = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line and not line.startswith("#") and "=" in line:
            key, value = line.split("=", 1)
            entries[key] = value
    return entries


def _data_lines(path: Path) -> list[str]:
    return [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln and not ln.startswith("#")]


def _parse_audit(path: Path) -> tuple[str, str, list[dict[str, str]]]:
    theorem, verdict, blocks, current = "", "", [], None
    for line in _data_lines(path):
        if line.startswith("VERDICT "):
            _, theorem, verdict = line.split()
        elif line.startswith("[") and line.endswith("]"):
            current = {"section": line[1:-1]}
            blocks.append(current)
        elif current is not None and "=" in line:
            key, value = line.split("=", 1)
            current[key] = value
    return theorem, verdict, blocks


def cmd_report(args) -> int:
    """Collect finished runs into plot-ready CSVs. Nothing is recomputed."""
    runs = [Path(r) for r in args.runs]
    if not runs:
        if args.config is None:
            raise UsageError("report needs run directories or --config")
        cfg = load_config(args.config)
        runs = [cfg.resolve(str(cfg.output_dir))]
    target = Path(args.out) if args.out else runs[0]
    check_writable(target)
    stamp = None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")
    out = Outputs(target, stamp)

    errors = ["run,identity,spacing,max_error,tolerance,pass"]
    orders = ["run,identity,spacing,max_error"]
    margins = ["run,theorem,section,name,holds,margin,tolerance,worst_point"]
    verdicts = ["run,theorem,verdict"]
    history = ["run,iteration,residual,damping"]
    found = False
    for run in runs:
        if not run.is_dir():
            raise UsageError(f"{run}: not a run directory")
        label = run.name
        manifest_path = run / "run.manifest"
        spacing = _read_manifest(manifest_path).get("max_spacing", "nan") if manifest_path.exists() else "nan"
        summary = run / "summary.csv"
        if summary.exists():
            found = True
            for line in _data_lines(summary)[1:]:
                identity, max_error, tol, passed = line.split(",")
                errors.append(f"{label},{identity},{spacing},{max_error},{tol},{passed}")
        convergence = run / "convergence.csv"
        if convergence.exists():
            found = True
            lines = _data_lines(convergence)
            names = lines[0].split(",")[1:]
            for line in lines[1:]:
                step, *values = line.split(",")
                for name, value in zip(names, values):
                    orders.append(f"{label},{name},{step},{value}")
        for path in sorted(run.glob("*.audit.txt")):
            found = True
            theorem, verdict, blocks = _parse_audit(path)
            verdicts.append(f"{label},{theorem},{verdict}")
            for b in blocks:
                if b["section"] in ("hypothesis", "inequality"):
                    worst = b.get("worst_point", "").replace(",", ";")
                    margins.append(f"{label},{theorem},{b['section']},{b['name']},{b['holds']},"
                                   f"{b['margin']},{b['tolerance']},{worst}")
        solver = run / "solver_report.txt"
        if solver.exists():
            found = True
            report = _read_manifest(solver)
            residuals = [r for r in report.get("residual_history", "").split(",") if r]
            damping = ["nan"] + [d for d in report.get("damping_history", "").split(",") if d]
            for i, r in enumerate(residuals):
                history.append(f"{label},{i},{r},{damping[i] if i < len(damping) else 'nan'}")
    if not found:
        raise UsageError("no run outputs found in " + ", ".join(str(r) for r in runs))
    for name, lines in (("error_vs_spacing.csv", errors), ("convergence_study.csv", orders),
                        ("audit_margins.csv", margins),
                        ("audit_verdicts.csv", verdicts), ("solver_history.csv", history)):
        if len(lines) > 1:
            out.write(name, "\n".join(lines) + "\n")
    print(f"report: wrote plot data to {target}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value run configuration")
    common.add_argument("--out", help="output directory (overrides outputs.directory)")
    common.add_argument("--no-timestamp", action="store_true", help="omit the generated= header line")
    common.add_argument("--spacing-override", type=float, default=None,
                        help="resample the configured domain at this spacing")
    common.add_argument("-v", "--verbose", action="store_true", help="log solver progress")

    parser = argparse.ArgumentParser(prog="warpgraphs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="oracle-versus-formula identity suite")
    sub.add_parser("solve", parents=[common], help="solve the configured CMC Dirichlet problem")
    sub.add_parser("audit", parents=[common], help="audit theorem hypotheses and inequalities")
    report = sub.add_parser("report", parents=[common], help="collect run outputs into plot-ready CSVs")
    report.add_argument("runs", nargs="*", help="run directories to collect")
    return parser


COMMANDS = {"verify": cmd_verify, "solve": cmd_solve, "audit": cmd_audit, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ConfigError, UsageError, FieldFormatError, AuditModelError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WarpGraphError as exc:
        # invalid generated surfaces and similar input problems
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
