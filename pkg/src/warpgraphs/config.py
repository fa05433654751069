"""Run configuration: flat ``key = value`` text with dotted keys.

One assignment per line, ``#`` starts a comment, blank lines are ignored.
Exactly one surface section (``slice``, ``perturbed``, ``file``, ``umbilic``
or ``solve``) must appear. Unknown or repeated keys are rejected so that a
typo never silently falls back to a default.

Example
-------
::

    model.epsilon = -1
    model.warp = exponential
    grid.extents = 64
    grid.spacing = 0.1
    grid.boundary = periodic
    perturbed.t0 = 0.0
    perturbed.amplitude = 0.05
    perturbed.mode = 1, 1
    suites = identities, audits
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, WarpGraphError
from .graph_geometry import Orientation
from .theorem_audit import TheoremId
from .warp_core import Boundary, Grid, WarpedModel, WarpFamily, WarpKind

SURFACE_SOURCES = ("slice", "perturbed", "file", "umbilic", "solve")
SUITES = ("identities", "audits", "solver")

_KEYS = {
    "model.epsilon", "model.warp", "model.fiber_dim",
    "grid.extents", "grid.spacing", "grid.lengths", "grid.boundary",
    "surface.id",
    "slice.t0",
    "perturbed.t0", "perturbed.amplitude", "perturbed.mode",
    "file.path",
    "umbilic.H", "umbilic.radius", "umbilic.center", "umbilic.shift",
    "solve.H_target", "solve.boundary", "solve.t0", "solve.amplitude", "solve.mode",
    "solve.radius", "solve.center", "solve.shift", "solve.path",
    "solve.max_iters", "solve.newton_tol", "solve.damping",
    "orientation", "outputs.directory", "suites", "audit.theorems",
    "verify.tol_constant", "verify.convergence",
}
_TEXT_KEYS = {"file.path", "solve.boundary", "solve.path"}


@dataclass(frozen=True)
class SurfaceSpec:
    """Which generator produces the surface, with its raw ``section.key`` entries."""

    source: str
    params: dict[str, str]


@dataclass(frozen=True)
class RunConfig:
    model: WarpedModel
    grid: Grid | None
    surface: SurfaceSpec
    surface_id: str = "surface"
    orientation: Orientation = Orientation.ETA_NEGATIVE
    output_dir: Path = Path("out")
    suites: tuple[str, ...] = ("identities",)
    theorems: tuple[TheoremId, ...] | None = None
    tol_constant: float = 1.0
    convergence: bool = False
    base_dir: Path = field(default=Path("."), compare=False)

    def resolve(self, path: str) -> Path:
        """Relative paths in a config file are taken relative to that file."""
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def parse_lines(text: str, source: str = "<config>") -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: key {key!r} given twice")
        if not value:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        entries[key] = value
    return entries


def _float(entries, key, default=None) -> float:
    if key not in entries:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        value = float(entries[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {entries[key]!r}") from None
    if not np.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    return value


def _int(entries, key, default=None) -> int:
    value = _float(entries, key, None if default is None else float(default))
    if value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {entries[key]!r}")
    return int(value)


def float_list(entries, key, length, default=None) -> tuple[float, ...]:
    if key not in entries:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return tuple(np.broadcast_to(default, (length,)).tolist())
    try:
        values = [float(v) for v in entries[key].split(",")]
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {entries[key]!r}") from None
    if len(values) == 1:
        values = values * length
    if len(values) != length:
        raise ConfigError(f"{key}: expected 1 or {length} values, got {len(values)}")
    return tuple(values)


def _bool(entries, key, default: bool) -> bool:
    if key not in entries:
        return default
    value = entries[key].lower()
    if value in ("true", "yes", "1", "on"):
        return True
    if value in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {entries[key]!r}")


def _names(entries, key) -> tuple[str, ...] | None:
    if key not in entries:
        return None
    names = tuple(v.strip() for v in entries[key].split(",") if v.strip())
    if not names:
        raise ConfigError(f"{key}: empty list")
    return names


def _model(entries) -> WarpedModel:
    eps = _int(entries, "model.epsilon")
    try:
        kind = WarpKind(entries.get("model.warp", "exponential").strip().lower())
    except ValueError:
        raise ConfigError(f"model.warp: unknown warp {entries['model.warp']!r}") from None
    try:
        return WarpedModel(eps, WarpFamily(kind), _int(entries, "model.fiber_dim", 2))
    except WarpGraphError as exc:
        raise ConfigError(f"model: {exc}") from None


def _grid(entries, dim: int, required: bool) -> Grid | None:
    keys = [k for k in entries if k.startswith("grid.")]
    if not keys:
        if required:
            raise ConfigError("missing grid section (grid.extents, grid.spacing or grid.lengths, grid.boundary)")
        return None
    extents = tuple(int(e) for e in float_list(entries, "grid.extents", dim))
    boundary = entries.get("grid.boundary", "periodic")
    if ("grid.spacing" in entries) == ("grid.lengths" in entries):
        raise ConfigError("give exactly one of grid.spacing and grid.lengths")
    try:
        if "grid.lengths" in entries:
            return Grid.box(extents, float_list(entries, "grid.lengths", dim), boundary)
        return Grid(extents, float_list(entries, "grid.spacing", dim), Boundary.parse(boundary))
    except WarpGraphError as exc:
        raise ConfigError(f"grid: {exc}") from None


def build_config(entries: dict[str, str], base_dir: Path = Path(".")) -> RunConfig:
    model = _model(entries)
    present = [s for s in SURFACE_SOURCES if any(k.startswith(s + ".") for k in entries)]
    if len(present) != 1:
        found = ", ".join(present) if present else "none"
        raise ConfigError(f"exactly one surface source ({', '.join(SURFACE_SOURCES)}) must be given; found {found}")
    source = present[0]
    params = {k: v for k, v in entries.items() if k.startswith(source + ".")}
    for key, value in params.items():
        if key in _TEXT_KEYS:
            continue
        try:
            [float(v) for v in value.split(",")]
        except ValueError:
            raise ConfigError(f"{key}: not a number: {value!r}") from None
    grid = _grid(entries, model.fiber_dim, required=source != "file")

    try:
        orientation = Orientation.parse(entries.get("orientation", "eta_negative"))
    except WarpGraphError as exc:
        raise ConfigError(f"orientation: {exc}") from None
    suites = _names(entries, "suites") or ("identities",)
    for s in suites:
        if s not in SUITES:
            raise ConfigError(f"suites: unknown suite {s!r} (choose from {', '.join(SUITES)})")
    theorems = _names(entries, "audit.theorems")
    if theorems is not None:
        try:
            theorems = tuple(TheoremId.parse(t) for t in theorems)
        except WarpGraphError as exc:
            raise ConfigError(f"audit.theorems: {exc}") from None
    surface_id = entries.get("surface.id", "surface")
    if any(c in surface_id for c in "/\\") or surface_id.startswith("."):
        raise ConfigError(f"surface.id: invalid id {surface_id!r}")
    tol_constant = _float(entries, "verify.tol_constant", 1.0)
    if tol_constant <= 0:
        raise ConfigError("verify.tol_constant must be positive")
    return RunConfig(
        model=model,
        grid=grid,
        surface=SurfaceSpec(source, params),
        surface_id=surface_id,
        orientation=orientation,
        output_dir=Path(entries.get("outputs.directory", "out")),
        suites=suites,
        theorems=theorems,
        tol_constant=tol_constant,
        convergence=_bool(entries, "verify.convergence", False),
        base_dir=base_dir,
    )


def load_config(path) -> RunConfig:
    """Parse a config file.

    Raises
    ------
    ConfigError
        On unreadable files, syntax errors, unknown keys or invalid values.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return build_config(parse_lines(text, str(path)), path.parent)


def check_writable(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    if not os.access(directory, os.W_OK):
        raise ConfigError(f"output directory {directory} is not writable")


def param_float(surface_spec: SurfaceSpec, key: str, default=None) -> float:
    return _float(surface_spec.params, f"{surface_spec.source}.{key}", default)


def param_int(surface_spec: SurfaceSpec, key: str, default=None) -> int:
    return _int(surface_spec.params, f"{surface_spec.source}.{key}", default)


def param_floats(surface_spec: SurfaceSpec, key: str, length: int, default=None) -> tuple[float, ...]:
    return float_list(surface_spec.params, f"{surface_spec.source}.{key}", length, default)


def param_str(surface_spec: SurfaceSpec, key: str, default: str | None = None) -> str:
    full = f"{surface_spec.source}.{key}"
    if full not in surface_spec.params:
        if default is None:
            raise ConfigError(f"missing required key {full!r}")
        return default
    return surface_spec.params[full]
