"""Uniform grids on intervals and rectangles, grid functions, and the cone geometry.

The seminorm used throughout the package is ``||u|| = min_D u`` for a
designated compact interior node set ``D``.  It is monotone and positively
homogeneous, and the indicator ``chi_D`` has ``||chi_D|| = |chi_D| = 1``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

# Negative values smaller than this (relative to the sup norm) are treated as
# roundoff from the solvers rather than a non-cone element.
NEG_TOL = 1e-12


class ConeError(ValueError):
    """A function passed where a cone (nonnegative) element is required is negative."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _snap_inward(lo: float, hi: float, h: float, n: int) -> tuple[int, int]:
    i0 = max(0, math.ceil(lo / h - 1e-9))
    i1 = min(n - 1, math.floor(hi / h + 1e-9))
    return i0, i1


@dataclass(frozen=True, eq=False)
class GridDomain:
    """Uniform tensor grid on ``[0, L]`` or ``[0, Lx] x [0, Ly]``.

    ``d1`` and ``d2`` are boolean node masks of the two compact subsets used
    by the seminorms; they must sit at least two cells inside the boundary.
    Use :meth:`interval` or :meth:`rectangle` to build one.
    """

    kind: str
    shape: tuple[int, ...]
    lengths: tuple[float, ...]
    d1: np.ndarray = field(repr=False)
    d2: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in ("interval", "rectangle"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        dim = 1 if self.kind == "interval" else 2
        if len(self.shape) != dim or len(self.lengths) != dim:
            raise ValueError(f"{self.kind} needs {dim} node counts and lengths")
        if any(n < 3 for n in self.shape):
            raise ValueError("need at least 3 nodes per axis")
        if any(not (L > 0) for L in self.lengths):
            raise ValueError("domain lengths must be positive")
        for name in ("d1", "d2"):
            m = np.asarray(getattr(self, name), dtype=bool)
            if m.shape != self.shape:
                raise ValueError(f"{name} mask has shape {m.shape}, expected {self.shape}")
            if not m.any():
                raise ValueError(f"{name} is empty")
            for axis, n in enumerate(self.shape):
                idx = np.nonzero(m.any(axis=tuple(a for a in range(dim) if a != axis)))[0]
                if idx.min() < 2 or idx.max() > n - 3:
                    raise ValueError(
                        f"{name} must stay at distance >= 2h from the boundary (axis {axis})"
                    )
            object.__setattr__(self, name, _readonly(m))

    # -- constructors -------------------------------------------------
    @classmethod
    def interval(cls, n: int = 1025, L: float = 1.0,
                 D1: tuple[float, float] = (0.25, 0.75),
                 D2: tuple[float, float] | None = None,
                 D1_index: tuple[int, int] | None = None,
                 D2_index: tuple[int, int] | None = None) -> "GridDomain":
        """Interval ``[0, L]`` with ``n`` nodes.

        ``D1``/``D2`` are coordinate intervals snapped inward to the grid;
        ``D*_index`` give inclusive node index ranges instead.  ``D2``
        defaults to ``D1``.
        """
        h = L / (n - 1)
        masks = []
        for coord, index in ((D1, D1_index), (D2 if D2 is not None else D1, D2_index if D2_index is not None else D1_index)):
            if index is None:
                index = _snap_inward(coord[0], coord[1], h, n)
            i0, i1 = index
            if i1 < i0:
                raise ValueError(f"subset {coord} contains no grid node")
            m = np.zeros(n, dtype=bool)
            m[i0:i1 + 1] = True
            masks.append(m)
        return cls("interval", (n,), (float(L),), masks[0], masks[1])

    @classmethod
    def rectangle(cls, nx: int = 65, ny: int | None = None, Lx: float = 1.0, Ly: float = 1.0,
                  D1: Sequence[tuple[float, float]] = ((0.25, 0.75), (0.25, 0.75)),
                  D2: Sequence[tuple[float, float]] | None = None) -> "GridDomain":
        """Rectangle ``[0, Lx] x [0, Ly]``; ``D1``/``D2`` are ``((x0, x1), (y0, y1))`` boxes."""
        ny = nx if ny is None else ny
        hx, hy = Lx / (nx - 1), Ly / (ny - 1)
        masks = []
        for box in (D1, D2 if D2 is not None else D1):
            (x0, x1), (y0, y1) = box
            i0, i1 = _snap_inward(x0, x1, hx, nx)
            j0, j1 = _snap_inward(y0, y1, hy, ny)
            if i1 < i0 or j1 < j0:
                raise ValueError(f"subset {box} contains no grid node")
            m = np.zeros((nx, ny), dtype=bool)
            m[i0:i1 + 1, j0:j1 + 1] = True
            masks.append(m)
        return cls("rectangle", (nx, ny), (float(Lx), float(Ly)), masks[0], masks[1])

    # -- geometry -----------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / (n - 1) for L, n in zip(self.lengths, self.shape))

    @property
    def node_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def key(self) -> tuple:
        """Hashable identity of the grid geometry (subsets excluded)."""
        return (self.kind, self.shape, self.lengths)

    @property
    def boundary(self) -> np.ndarray:
        b = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            sl = [slice(None)] * self.dim
            sl[axis] = 0
            b[tuple(sl)] = True
            sl[axis] = -1
            b[tuple(sl)] = True
        return b

    @property
    def interior(self) -> np.ndarray:
        return ~self.boundary

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(0.0, L, n) for L, n in zip(self.lengths, self.shape)]

    def coords(self) -> list[np.ndarray]:
        """Nodal coordinate arrays, one per axis, each of shape ``self.shape``."""
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def mask(self, which) -> np.ndarray:
        """Node mask for ``1``/``"D1"``, ``2``/``"D2"``, ``"interior"`` or ``"closure"``."""
        if which in (1, "D1"):
            return self.d1
        if which in (2, "D2"):
            return self.d2
        if which == "interior":
            return self.interior
        if which in ("closure", "omega"):
            return np.ones(self.shape, dtype=bool)
        raise ValueError(f"unknown region {which!r}")

    def cone(self, which=1) -> "ConeSpec":
        return ConeSpec(self.mask(which), self)

    # -- convenience --------------------------------------------------
    def function(self, values) -> "GridFunction":
        return GridFunction(np.broadcast_to(np.asarray(values, dtype=float), self.shape), self)

    def zeros(self) -> "GridFunction":
        return GridFunction(np.zeros(self.shape), self)

    def constant(self, c: float) -> "GridFunction":
        return GridFunction(np.full(self.shape, float(c)), self)

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "shape": list(self.shape),
            "lengths": list(self.lengths),
            "spacing": list(self.spacing),
            "D1_nodes": int(self.d1.sum()),
            "D2_nodes": int(self.d2.sum()),
        }


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real nodal values on a :class:`GridDomain`.  Immutable."""

    values: np.ndarray = field(repr=False)
    domain: GridDomain

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.domain.shape:
            raise ValueError(f"values have shape {v.shape}, domain has {self.domain.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite values")
        object.__setattr__(self, "values", _readonly(v))

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.values * c, self.domain)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(values, self.domain)

    def __add__(self, other):
        return GridFunction(self.values + np.asarray(other), self.domain)

    def __sub__(self, other):
        return GridFunction(self.values - np.asarray(other), self.domain)

    def __mul__(self, c):
        return GridFunction(self.values * np.asarray(c), self.domain)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return sup_norm(self)

    def is_nonnegative(self) -> bool:
        return bool(self.values.min() >= -NEG_TOL * max(1.0, float(np.abs(self.values).max())))

    def is_dirichlet(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values[self.domain.boundary]) <= tol))


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """The compact subset ``D`` and its indicator; defines the seminorm."""

    mask: np.ndarray = field(repr=False)
    domain: GridDomain

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != self.domain.shape:
            raise ValueError("mask shape does not match domain")
        if not m.any():
            raise ValueError("D is empty")
        object.__setattr__(self, "mask", _readonly(m))

    @property
    def indicator(self) -> GridFunction:
        return GridFunction(self.mask.astype(float), self.domain)


def sup_norm(u) -> float:
    """``max |u(x)|`` over all nodes."""
    a = np.asarray(u, dtype=float)
    return float(np.abs(a).max()) if a.size else 0.0


def _check_nonnegative(a: np.ndarray) -> None:
    lo = float(a.min())
    if lo < -NEG_TOL * max(1.0, float(np.abs(a).max())):
        raise ConeError(f"expected a nonnegative function, found min value {lo:.3e}")


def seminorm(u, D: ConeSpec) -> float:
    """``min_D u`` for nonnegative ``u``; raises :class:`ConeError` otherwise."""
    a = np.asarray(u, dtype=float)
    _check_nonnegative(a)
    return max(0.0, float(a[D.mask].min()))


def cone_membership(u, D: ConeSpec) -> bool:
    """True iff ``u >= seminorm(u, D) * chi_D`` at every node."""
    a = np.asarray(u, dtype=float)
    s = seminorm(u, D)
    return bool(np.all(a >= s * D.mask - NEG_TOL * max(1.0, s)))


def write_csv(u: GridFunction, path, value_name: str = "value") -> Path:
    """One row per node: coordinates then value, with a header row."""
    path = Path(path)
    names = ["x", "y"][: u.domain.dim]
    cols = [c.ravel() for c in u.domain.coords()] + [u.values.ravel()]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + [value_name])
        for row in zip(*cols):
            w.writerow([f"{v:.17g}" for v in row])
    return path


def read_csv(path, domain: GridDomain) -> GridFunction:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if len(header) != domain.dim + 1:
        raise ValueError(f"expected {domain.dim + 1} columns, got {len(header)}")
    vals = np.array([float(r[-1]) for r in body])
    if vals.size != int(np.prod(domain.shape)):
        raise ValueError("row count does not match domain")
    return GridFunction(vals.reshape(domain.shape), domain)
