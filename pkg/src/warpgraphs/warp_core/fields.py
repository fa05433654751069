"""Uniform fiber grids and immutable grid-sampled fields."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from ..errors import FieldError, FieldFormatError, GridError

MIN_EXTENT = 5


class Boundary(str, Enum):
    PERIODIC = "P"
    DIRICHLET = "D"

    @classmethod
    def parse(cls, value) -> "Boundary":
        if isinstance(value, Boundary):
            return value
        key = str(value).strip().lower()
        if key in ("p", "periodic"):
            return cls.PERIODIC
        if key in ("d", "dirichlet"):
            return cls.DIRICHLET
        raise GridError(f"unknown boundary mode {value!r}")


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid on the fiber ``R^n``.

    Sample ``k`` along an axis sits at ``k * spacing``. A periodic axis has
    period ``extent * spacing``; a Dirichlet axis includes both end points,
    so it spans ``(extent - 1) * spacing``.
    """

    extents: tuple[int, ...]
    spacing: tuple[float, ...]
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        extents = tuple(int(e) for e in self.extents)
        spacing = tuple(float(s) for s in np.broadcast_to(self.spacing, (len(extents),)))
        if not extents:
            raise GridError("grid needs at least one axis")
        if any(e < MIN_EXTENT for e in extents):
            raise GridError(f"every axis needs at least {MIN_EXTENT} samples, got {extents}")
        if any(not np.isfinite(s) or s <= 0 for s in spacing):
            raise GridError(f"spacing must be positive, got {spacing}")
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "boundary", Boundary.parse(self.boundary))

    @classmethod
    def box(cls, extents, lengths, boundary=Boundary.PERIODIC) -> "Grid":
        """Grid covering ``[0, L_i]`` on each axis with the given sample counts."""
        boundary = Boundary.parse(boundary)
        extents = tuple(int(e) for e in extents)
        lengths = np.broadcast_to(np.asarray(lengths, dtype=float), (len(extents),))
        if boundary is Boundary.PERIODIC:
            spacing = tuple(L / e for L, e in zip(lengths, extents))
        else:
            spacing = tuple(L / (e - 1) for L, e in zip(lengths, extents))
        return cls(extents, spacing, boundary)

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def lengths(self) -> tuple[float, ...]:
        if self.periodic:
            return tuple(e * s for e, s in zip(self.extents, self.spacing))
        return tuple((e - 1) * s for e, s in zip(self.extents, self.spacing))

    @property
    def max_spacing(self) -> float:
        return max(self.spacing)

    def axes(self) -> list[np.ndarray]:
        return [np.arange(e) * s for e, s in zip(self.extents, self.spacing)]

    def coordinates(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def interior_mask(self, margin: int = 0) -> np.ndarray:
        """Boolean mask dropping ``margin`` rows per side on Dirichlet axes."""
        mask = np.ones(self.extents, dtype=bool)
        if self.periodic or margin <= 0:
            return mask
        for axis in range(self.dim):
            index = [slice(None)] * self.dim
            index[axis] = slice(0, margin)
            mask[tuple(index)] = False
            index[axis] = slice(-margin, None)
            mask[tuple(index)] = False
        return mask

    def boundary_mask(self) -> np.ndarray:
        if self.periodic:
            return np.zeros(self.extents, dtype=bool)
        return ~self.interior_mask(1)

    def refined(self, factor: int = 2) -> "Grid":
        """Same domain, spacing divided by ``factor``."""
        if self.periodic:
            extents = tuple(e * factor for e in self.extents)
        else:
            extents = tuple((e - 1) * factor + 1 for e in self.extents)
        return Grid(extents, tuple(s / factor for s in self.spacing), self.boundary)

    def with_spacing(self, spacing: float) -> "Grid":
        """Same domain lengths resampled at (approximately) ``spacing``."""
        lengths = self.lengths
        if self.periodic:
            extents = tuple(max(MIN_EXTENT, round(L / spacing)) for L in lengths)
        else:
            extents = tuple(max(MIN_EXTENT, round(L / spacing) + 1) for L in lengths)
        return Grid.box(extents, lengths, self.boundary)

    def header(self) -> str:
        return (
            f"# dim={self.dim} extents={','.join(str(e) for e in self.extents)} "
            f"spacing={','.join(repr(s) for s in self.spacing)} boundary={self.boundary.value}"
        )


@dataclass(frozen=True, eq=False)
class _GridField:
    grid: Grid
    values: np.ndarray

    def _component_shape(self) -> tuple[int, ...]:
        return ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        expected = self.grid.extents + self._component_shape()
        if values.shape != expected:
            raise FieldError(f"{type(self).__name__} expects shape {expected}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise FieldError(f"{type(self).__name__} has a non-finite sample at {tuple(int(i) for i in bad)}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


class ScalarField(_GridField):
    """One real sample per grid point."""

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


class VectorField(_GridField):
    """``n`` components per grid point, stored along the trailing axis."""

    def _component_shape(self):
        return (self.grid.dim,)

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.values[..., i])


class TensorField(_GridField):
    """``n x n`` matrix per grid point (mixed indices allowed)."""

    def _component_shape(self):
        return (self.grid.dim, self.grid.dim)

    def component(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.values[..., i, j])


class SymTensorField(TensorField):
    """Symmetric ``n x n`` tensor per grid point.

    The full matrix is stored; the n(n+1)/2 independent components are its
    upper triangle.
    """

    def __post_init__(self):
        super().__post_init__()
        v = self.values
        scale = max(1.0, float(np.max(np.abs(v))))
        if np.max(np.abs(v - np.swapaxes(v, -1, -2))) > 1e-12 * scale:
            raise FieldError("SymTensorField values are not symmetric")

    def independent_components(self) -> np.ndarray:
        i, j = np.triu_indices(self.grid.dim)
        return self.values[..., i, j]


def write_field_csv(field: ScalarField, path) -> Path:
    """Write a scalar field as header line plus row-major samples."""
    path = Path(path)
    lines = [field.grid.header()]
    lines.extend(f"{x:.17g}" for x in np.asarray(field.values).ravel(order="C"))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _parse_header(path, line: str) -> Grid:
    if not line.startswith("#"):
        raise FieldFormatError(path, "missing '# dim=... extents=... spacing=... boundary=...' header")
    entries = {}
    for token in line[1:].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise FieldFormatError(path, f"malformed header token {token!r}")
        entries[key] = value
    try:
        dim = int(entries["dim"])
        extents = tuple(int(v) for v in entries["extents"].split(","))
        spacing = tuple(float(v) for v in entries["spacing"].split(","))
        boundary = Boundary.parse(entries["boundary"])
    except (KeyError, ValueError) as exc:
        raise FieldFormatError(path, f"bad header: {exc}") from None
    if len(extents) != dim or len(spacing) != dim:
        raise FieldFormatError(path, "header dim does not match extents/spacing")
    try:
        return Grid(extents, spacing, boundary)
    except GridError as exc:
        raise FieldFormatError(path, str(exc)) from None


def read_field_csv(path) -> ScalarField:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FieldFormatError(path, f"cannot read file: {exc.strerror}") from None
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FieldFormatError(path, "empty file")
    grid = _parse_header(path, lines[0])
    try:
        data = np.array([float(v) for v in lines[1:]])
    except ValueError as exc:
        raise FieldFormatError(path, f"non-numeric sample: {exc}") from None
    if data.size != int(np.prod(grid.extents)):
        raise FieldFormatError(path, f"expected {int(np.prod(grid.extents))} samples, found {data.size}")
    try:
        return ScalarField(grid, data.reshape(grid.extents))
    except FieldError as exc:
        raise FieldFormatError(path, str(exc)) from None
