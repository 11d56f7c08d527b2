"""Half-shifted periodic grid on the torus built from Q = (-2, 2]^d.

Sample points are x_j = -2 + 4(j + 1/2)/N per axis, so the origin (where the
drift is singular) is never a grid point.  Frequencies are xi_k = (pi/2) k
for integer vectors k with components in [-N/2, N/2).
"""

from __future__ import annotations

import json
import struct
import threading
from dataclasses import dataclass, field

import numpy as np

SIDE = 4.0  # torus period per axis
MAGIC = b"FRAK"


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class TorusGrid:
    d: int
    N: int

    def __post_init__(self):
        if self.d < 1:
            raise GridError(f"d={self.d}")
        if self.N < 4 or (self.N & (self.N - 1)) != 0:
            raise GridError(f"N={self.N}: need a power of two >= 4")

    @property
    def h(self) -> float:
        return SIDE / self.N

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def volume(self) -> float:
        return SIDE**self.d

    @property
    def shape(self):
        return (self.N,) * self.d

    def axis_points(self) -> np.ndarray:
        return -2.0 + SIDE * (np.arange(self.N) + 0.5) / self.N

    def coords(self):
        """d broadcastable coordinate arrays (meshgrid, ij indexing)."""
        x = self.axis_points()
        return np.meshgrid(*([x] * self.d), indexing="ij")

    def radius(self) -> np.ndarray:
        r2 = sum(c**2 for c in self.coords())
        return np.sqrt(r2)

    def freq_ints(self) -> np.ndarray:
        return (np.fft.fftfreq(self.N) * self.N).astype(np.int64)

    def freq_axes(self):
        """d broadcastable arrays of xi components."""
        xi = (np.pi / 2.0) * self.freq_ints()
        return np.meshgrid(*([xi] * self.d), indexing="ij")

    def freq_norm(self) -> np.ndarray:
        """|xi_k| on the full frequency lattice."""
        return np.sqrt(sum(a**2 for a in self.freq_axes()))

    def compatible(self, other: "TorusGrid") -> bool:
        return self.d == other.d and self.N == other.N


class ScalarField:
    """Real samples on a TorusGrid with a lazily cached spectrum.

    Fields are treated as immutable after construction; the FFT cache is
    filled at most once under a lock, so instances are safe to share across
    threads.
    """

    __slots__ = ("grid", "values", "_spectral", "_lock")

    def __init__(self, grid: TorusGrid, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise GridError(f"values shape {values.shape} != grid shape {grid.shape}")
        self.grid = grid
        self.values = values
        self._spectral = None
        self._lock = threading.Lock()

    @property
    def spectral(self) -> np.ndarray:
        if self._spectral is None:
            with self._lock:
                if self._spectral is None:
                    self._spectral = np.fft.fftn(self.values)
        return self._spectral

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)

    # pointwise arithmetic, returning new fields
    def _coerce(self, other):
        if isinstance(other, ScalarField):
            if not self.grid.compatible(other.grid):
                raise GridError("grid mismatch")
            return other.values
        return other

    def __add__(self, other):
        return ScalarField(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return ScalarField(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ScalarField(self.grid, self.values / self._coerce(other))

    def __pow__(self, p):
        return ScalarField(self.grid, self.values**p)

    def __neg__(self):
        return ScalarField(self.grid, -self.values)


class VectorField:
    """d scalar components sharing one grid."""

    __slots__ = ("grid", "components")

    def __init__(self, components):
        components = list(components)
        if not components:
            raise GridError("empty vector field")
        grid = components[0].grid
        for c in components[1:]:
            if not grid.compatible(c.grid):
                raise GridError("component grid mismatch")
        if len(components) != grid.d:
            raise GridError(f"{len(components)} components for d={grid.d}")
        self.grid = grid
        self.components = components

    def magnitude(self) -> ScalarField:
        m = np.sqrt(sum(c.values**2 for c in self.components))
        return ScalarField(self.grid, m)

    def __mul__(self, other):
        return VectorField([c * other for c in self.components])

    __rmul__ = __mul__

    def __sub__(self, other):
        return VectorField([a - b for a, b in zip(self.components, other.components)])

    def dot(self, other: "VectorField") -> ScalarField:
        vals = sum(a.values * b.values for a, b in zip(self.components, other.components))
        return ScalarField(self.grid, vals)


def constant_field(grid: TorusGrid, c: float = 1.0) -> ScalarField:
    return ScalarField(grid, np.full(grid.shape, float(c)))


def mean(u: ScalarField) -> float:
    """Integral over the torus, <u> (measure 4^d in total)."""
    return float(u.values.sum() * u.grid.cell_volume)


def inner(u: ScalarField, v: ScalarField) -> float:
    if not u.grid.compatible(v.grid):
        raise GridError("grid mismatch")
    return float((u.values * v.values).sum() * u.grid.cell_volume)


def norm_l2(u: ScalarField) -> float:
    return float(np.sqrt((u.values**2).sum() * u.grid.cell_volume))


def norm_lp(u: ScalarField, p: float) -> float:
    return float(((np.abs(u.values) ** p).sum() * u.grid.cell_volume) ** (1.0 / p))


def norm_inf(u: ScalarField) -> float:
    return float(np.abs(u.values).max())


def save_field(path, u: ScalarField, extra: dict | None = None):
    """Flat binary dump (magic, d, N, dtype tag, raw C-order) + JSON sidecar."""
    header = MAGIC + struct.pack("<II4s", u.grid.d, u.grid.N, b"f8  ")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(u.values).tobytes())
    sidecar = {"d": u.grid.d, "N": u.grid.N, "dtype": "float64", "format": "frakolm-field-v1"}
    if extra:
        sidecar.update(extra)
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)


def load_field(path) -> ScalarField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise GridError(f"bad magic {magic!r}")
        d, N, tag = struct.unpack("<II4s", fh.read(12))
        if tag != b"f8  ":
            raise GridError(f"unsupported dtype tag {tag!r}")
        grid = TorusGrid(d=d, N=N)
        data = np.frombuffer(fh.read(), dtype=np.float64).reshape(grid.shape)
    return ScalarField(grid, data.copy())
