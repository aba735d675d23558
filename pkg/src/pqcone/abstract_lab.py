"""Finite-dimensional cone sandbox.

Component spaces are ``R^n1`` and ``R^n2`` with the sup norm, the cone of
nonnegative vectors and the seminorm ``||u|| = min_{j in mask} u_j``.  With
``chi`` the 0/1 indicator of the mask we get ``|chi| = ||chi|| = 1`` and every
nonnegative vector satisfies ``u >= ||u|| chi``, so the working cone is the
whole orthant.  ``phi = chi``.

:func:`check_conditions` evaluates localization hypotheses by extremizing
over Cartesian samples of the relevant sets, :func:`brute_force_fixed_points`
is an independent fixed-point oracle, and :func:`validate_theorem` checks
that the promised fixed points are really there.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import scipy.ndimage
import scipy.optimize

from . import expr as ex
from .certify import ConditionRecord, compare

log = logging.getLogger(__name__)

MAX_DIM = 6
MAX_POINTS = 250_000
SCAN_POINTS = 40_000
LAB_DELTA = 1e-12
LAMBDA_GRID = np.array([1 + 2.0 ** -k for k in range(21)] + [2.0, 4.0, 8.0])
_OPEN = 1 + 2.0 ** -20   # smallest lambda tried when lambda > 1 is required

CATALOG = (
    "radii", "radii-unit", "invariance",
    "boundary-U", "boundary-A-or", "boundary-U-pi", "boundary-U-rho",
    "boundary-V", "boundary-V-pi", "boundary-V-rho", "boundary-V-strict",
    "seminorm-sphere-strict", "no-eigen-rho", "inner-V", "inner-A-or",
    "order-unit", "boundary-U-unit", "iso-U", "iso-V",
    "ls-componentwise", "ls-joint",
)

THEOREMS = {
    "one-solution": ("radii", "boundary-U", "invariance"),
    "one-solution-A": ("radii", "boundary-A-or", "invariance"),
    "one-solution-pi": ("radii", "boundary-U-pi", "ls-componentwise"),
    "one-solution-rho": ("radii", "boundary-U-rho", "ls-joint"),
    "both-nonzero": ("radii", "boundary-V", "invariance"),
    "both-nonzero-pi": ("radii", "boundary-V-pi", "ls-componentwise"),
    "both-nonzero-rho": ("radii", "boundary-V-rho", "ls-joint"),
    "three": ("radii", "boundary-V-strict", "invariance", "no-eigen-rho"),
    "three-refined": ("radii", "seminorm-sphere-strict", "invariance", "no-eigen-rho"),
    "three-nonzero": ("radii", "boundary-V-strict", "invariance", "no-eigen-rho", "inner-V"),
    "three-nonzero-or": ("radii", "boundary-V-strict", "invariance", "no-eigen-rho", "inner-A-or"),
    "order-unit": ("order-unit", "radii-unit", "boundary-U-unit", "invariance"),
    "ladder": (),   # per-rung hypotheses, see _ladder_hypotheses
}


class LabError(ValueError):
    pass


class HypothesisError(RuntimeError):
    """validate_theorem was asked to run with a failing hypothesis."""

    def __init__(self, theorem: str, failed: list):
        super().__init__(f"hypotheses of {theorem} not satisfied: {', '.join(e.id for e in failed)}")
        self.failed = failed


# -- spaces and vectors ------------------------------------------------------

@dataclass(frozen=True)
class ConeVector:
    values: tuple
    mask: tuple

    def __post_init__(self):
        vals = tuple(float(x) for x in self.values)
        mask = tuple(bool(m) for m in self.mask)
        if len(vals) != len(mask):
            raise LabError("values and mask differ in length")
        if not any(mask):
            raise LabError("seminorm mask must be nonempty")
        if any(x < 0 for x in vals):
            raise LabError("cone vectors are componentwise nonnegative")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "mask", mask)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values)

    @property
    def sup(self) -> float:
        return max(self.values)

    @property
    def semi(self) -> float:
        return min(x for x, m in zip(self.values, self.mask) if m)

    @classmethod
    def chi(cls, mask) -> "ConeVector":
        return cls(tuple(1.0 if m else 0.0 for m in mask), mask)


@dataclass(frozen=True)
class Radii:
    r1: float | None = None
    r2: float | None = None
    R1: float | None = None
    R2: float | None = None
    rho1: float | None = None
    rho2: float | None = None
    varrho1: float | None = None
    varrho2: float | None = None
    rhot1: float | None = None
    rhot2: float | None = None
    rungs: tuple = ()   # ((r1, r2, R1, R2), ...) for the ladder

    def values_for(self, i: int) -> list[float]:
        names = ("r", "R", "rho", "varrho", "rhot")
        out = [getattr(self, f"{n}{i}") for n in names]
        out += [rung[i - 1] for rung in self.rungs] + [rung[i + 1] for rung in self.rungs]
        return [x for x in out if x is not None]

    def need(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise LabError(f"missing radii: {', '.join(missing)}")
        return [getattr(self, n) for n in names]


class LabOperator:
    """``N = (N1, N2)`` acting on batches: ``N(U, V)`` with ``U`` of shape ``(m, n1)``."""

    def __init__(self, n1: int, n2: int, N1: Callable, N2: Callable, mask1=None, mask2=None,
                 name: str = "", isotone: bool = False):
        if n1 < 1 or n2 < 1:
            raise LabError("component dimensions must be positive")
        if n1 + n2 > MAX_DIM:
            raise LabError(f"total dimension {n1 + n2} exceeds {MAX_DIM}")
        self.n1, self.n2 = n1, n2
        self.mask1 = np.array(mask1 if mask1 is not None else [True] * n1, dtype=bool)
        self.mask2 = np.array(mask2 if mask2 is not None else [True] * n2, dtype=bool)
        if self.mask1.shape != (n1,) or self.mask2.shape != (n2,):
            raise LabError("mask length must match the component dimension")
        if not self.mask1.any() or not self.mask2.any():
            raise LabError("seminorm mask must be nonempty")
        self._N1, self._N2 = N1, N2
        self.name = name
        self.isotone = isotone

    @classmethod
    def from_exprs(cls, N1: Sequence[str], N2: Sequence[str], mask1=None, mask2=None,
                   name: str = "", isotone: bool = False) -> "LabOperator":
        """Component maps as expression strings over ``u1..un1, v1..vn2`` (``u``/``v`` alias the first)."""
        n1, n2 = len(N1), len(N2)
        names = [f"u{j + 1}" for j in range(n1)] + [f"v{j + 1}" for j in range(n2)] + ["u", "v"]
        e1 = [ex.parse(s, names) for s in N1]
        e2 = [ex.parse(s, names) for s in N2]

        def env(U, V):
            d = {f"u{j + 1}": U[:, j] for j in range(n1)}
            d.update({f"v{j + 1}": V[:, j] for j in range(n2)})
            d["u"], d["v"] = U[:, 0], V[:, 0]
            return d

        def make(es):
            def f(U, V):
                e = env(U, V)
                return np.stack([np.broadcast_to(np.asarray(x.eval(e), dtype=float), (U.shape[0],))
                                 for x in es], axis=1)
            return f

        op = cls(n1, n2, make(e1), make(e2), mask1, mask2, name, isotone)
        op.sources = (tuple(N1), tuple(N2))
        return op

    def __call__(self, U, V):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        V = np.atleast_2d(np.asarray(V, dtype=float))
        A = np.asarray(self._N1(U, V), dtype=float).reshape(U.shape[0], self.n1)
        B = np.asarray(self._N2(U, V), dtype=float).reshape(U.shape[0], self.n2)
        return A, B

    def semi1(self, U):
        return np.asarray(U)[..., self.mask1].min(axis=-1)

    def semi2(self, V):
        return np.asarray(V)[..., self.mask2].min(axis=-1)

    @property
    def chi1(self) -> np.ndarray:
        return self.mask1.astype(float)

    @property
    def chi2(self) -> np.ndarray:
        return self.mask2.astype(float)


# -- sampling -------------------------------------------------------------

def _axis_values(top: float, k: int, extra) -> np.ndarray:
    vals = np.concatenate([np.linspace(0.0, top, k), [x for x in extra if 0 <= x <= top]])
    return np.unique(vals)


@dataclass
class _Sample:
    U: np.ndarray
    V: np.ndarray
    su: np.ndarray
    sv: np.ndarray
    mu: np.ndarray
    mv: np.ndarray
    NU: np.ndarray
    NV: np.ndarray
    nsu: np.ndarray   # |N1|
    nsv: np.ndarray
    nmu: np.ndarray   # ||N1||
    nmv: np.ndarray


class _Sampler:
    def __init__(self, op: LabOperator, radii: Radii, resolution: int):
        if resolution < 2:
            raise LabError("sampling resolution must be >= 2")
        self.op, self.radii, self.k = op, radii, resolution
        self._cache: dict = {}

    def box(self, top1: float, top2: float) -> _Sample:
        key = (top1, top2)
        if key in self._cache:
            return self._cache[key]
        op = self.op
        ex1, ex2 = self.radii.values_for(1), self.radii.values_for(2)
        n = op.n1 + op.n2
        k = self.k
        while k > 2 and (k + max(len(ex1), len(ex2))) ** n > MAX_POINTS:
            k -= 1
        axes = [_axis_values(top1, k, ex1)] * op.n1 + [_axis_values(top2, k, ex2)] * op.n2
        pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        U, V = pts[:, :op.n1], pts[:, op.n1:]
        NU, NV = op(U, V)
        s = _Sample(U, V, U.max(axis=1), V.max(axis=1), op.semi1(U), op.semi2(V), NU, NV,
                    np.abs(NU).max(axis=1), np.abs(NV).max(axis=1), op.semi1(NU), op.semi2(NV))
        self._cache[key] = s
        return s


# -- catalog entries ---------------------------------------------------------

@dataclass
class CatalogEntry:
    id: str
    verdict: bool
    margin: float
    parts: list[ConditionRecord] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    samples: int = 0
    warning: str | None = None

    def to_json(self) -> dict:
        return {"condition": self.id, "verdict": "PASS" if self.verdict else "FAIL",
                "margin": self.margin, "samples": self.samples, "warning": self.warning,
                "params": self.params, "parts": [p.to_json() for p in self.parts]}


def _witness(s: _Sample, sel: np.ndarray, j: int) -> dict:
    idx = np.flatnonzero(sel)[j]
    return {"u": s.U[idx].tolist(), "v": s.V[idx].tolist()}


def _inf(cid, s: _Sample, sel, values, rhs, strict, label) -> ConditionRecord | None:
    if not sel.any():
        return None
    vals = values[sel]
    j = int(np.argmin(vals))
    return compare(cid, label, float(vals[j]), ">" if strict else ">=", rhs, LAB_DELTA,
                   f"{int(sel.sum())} samples", _witness(s, sel, j))


def _sup(cid, s: _Sample, sel, values, rhs, strict, label) -> ConditionRecord | None:
    if not sel.any():
        return None
    vals = values[sel]
    j = int(np.argmax(vals))
    return compare(cid, label, float(vals[j]), "<" if strict else "<=", rhs, LAB_DELTA,
                   f"{int(sel.sum())} samples", _witness(s, sel, j))


def _entry(cid, parts, combine="all", params=None, samples=0) -> CatalogEntry:
    real = [p for p in parts if p is not None]
    warning = None
    if len(real) < len(parts):
        warning = "empty sample set; vacuously true"
    if not real:
        return CatalogEntry(cid, True, float("inf"), [], params or {}, samples, warning)
    if combine == "all":
        verdict = all(p.verdict for p in real)
        margin = min(p.margin for p in real)
    else:
        verdict = any(p.verdict for p in real) or len(real) < len(parts)
        margin = max(p.margin for p in real)
    return CatalogEntry(cid, bool(verdict), float(margin), real, params or {}, samples, warning)


def _best_scale(a: np.ndarray, b: np.ndarray, lo: float) -> np.ndarray:
    """``min over lambda >= lo of |a - lambda b|_inf`` row-wise.

    Candidates are the coordinate ratios ``a_j / b_j`` (so an exact relation
    ``a = lambda b`` is always detected), a fixed grid and ``lo`` itself.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(b > 0, a / b, lo)
    cand = np.concatenate([ratios, np.broadcast_to(LAMBDA_GRID, (a.shape[0], LAMBDA_GRID.size)),
                           np.full((a.shape[0], 1), lo)], axis=1)
    cand = np.maximum(cand, lo)
    d = np.abs(a[:, None, :] - cand[:, :, None] * b[:, None, :]).max(axis=2)
    return d.min(axis=1)


def _eigen_distance(cid, s: _Sample, sel, dist, scale, label) -> ConditionRecord | None:
    if not sel.any():
        return None
    vals = dist[sel]
    j = int(np.argmin(vals))
    return compare(cid, label, float(vals[j]), ">", LAB_DELTA * scale, 0.0,
                   f"{int(sel.sum())} samples", _witness(s, sel, j))


# -- check_conditions --------------------------------------------------------

def check_conditions(op: LabOperator, radii: Radii, ids: Sequence[str] = CATALOG,
                     resolution: int = 9, A: Callable | None = None) -> list[CatalogEntry]:
    """Evaluate the requested conditions; returns one entry per id.

    ``A`` (for ``boundary-A-or``) is a predicate ``A(U, V) -> bool array``
    selecting a subset of ``{||u|| < r1, ||v|| < r2}``; it defaults to that set.
    """
    unknown = [i for i in ids if i not in CATALOG]
    if unknown:
        raise LabError(f"unknown condition id(s): {', '.join(unknown)}")
    sampler = _Sampler(op, radii, resolution)
    return [_CHECKS[cid](op, radii, sampler, A) for cid in ids]


def _c_box(radii, sampler):
    R1, R2 = radii.need("R1", "R2")
    return sampler.box(R1, R2)


def _chk_radii(op, radii, sampler, A):
    r1, r2, R1, R2 = radii.need("r1", "r2", "R1", "R2")
    # |phi| = 1, ||phi|| = ||chi|| = 1, and ||u|| <= |u| so c_i = 1
    parts = [compare("radii", "r1 < ||phi1|| ||chi1|| R1", r1, "<", R1, LAB_DELTA),
             compare("radii", "r2 < ||phi2|| ||chi2|| R2", r2, "<", R2, LAB_DELTA)]
    if radii.rho1 is not None and radii.rho2 is not None:
        parts += [compare("radii", "0 < c1 rho1", radii.rho1, ">", 0.0, 0.0),
                  compare("radii", "0 < c2 rho2", radii.rho2, ">", 0.0, 0.0),
                  compare("radii", "c1 rho1 < r1", radii.rho1, "<", r1, LAB_DELTA),
                  compare("radii", "c2 rho2 < r2", radii.rho2, "<", r2, LAB_DELTA)]
        if radii.varrho1 is not None and radii.varrho2 is not None:
            parts += [compare("radii", "varrho1 < ||phi1|| ||chi1|| rho1", radii.varrho1, "<", radii.rho1, LAB_DELTA),
                      compare("radii", "varrho2 < ||phi2|| ||chi2|| rho2", radii.varrho2, "<", radii.rho2, LAB_DELTA)]
        if radii.rhot1 is not None and radii.rhot2 is not None:
            parts += [compare("radii", "rhot1 <= rho1", radii.rhot1, "<=", radii.rho1, LAB_DELTA),
                      compare("radii", "rhot2 <= rho2", radii.rhot2, "<=", radii.rho2, LAB_DELTA)]
    return _entry("radii", parts)


def _chk_radii_unit(op, radii, sampler, A):
    r1, r2, R1, R2 = radii.need("r1", "r2", "R1", "R2")
    # h0 = (1,...,1), ||h0|| = 1
    return _entry("radii-unit", [compare("radii-unit", "r1 < ||h0|| R1", r1, "<", R1, LAB_DELTA),
                                 compare("radii-unit", "r2 < ||h0|| R2", r2, "<", R2, LAB_DELTA)])


def _chk_invariance(op, radii, sampler, A):
    R1, R2 = radii.need("R1", "R2")
    s = sampler.box(R1, R2)
    all_ = np.ones(s.su.shape, dtype=bool)
    return _entry("invariance", [_sup("invariance", s, all_, s.nsu, R1, False, "sup_C |N1| <= R1"),
                                 _sup("invariance", s, all_, s.nsv, R2, False, "sup_C |N2| <= R2")],
                  samples=s.su.size)


def _sphere_check(cid, radii, sampler, kind, strict=False, factor=None, unit=False):
    """Inf of ``factor * ||N_i||`` over the two seminorm spheres of type ``kind``."""
    r1, r2 = radii.need("r1", "r2")
    s = _c_box(radii, sampler)
    if kind == "U":       # ||u|| = r1, ||v|| <= r2 and symmetric
        sel1, sel2 = (s.mu == r1) & (s.mv <= r2), (s.mu <= r1) & (s.mv == r2)
    elif kind == "V":     # ||u|| = r1, ||v|| >= r2 and symmetric
        sel1, sel2 = (s.mu == r1) & (s.mv >= r2), (s.mu >= r1) & (s.mv == r2)
    else:                 # whole seminorm spheres
        sel1, sel2 = s.mu == r1, s.mv == r2
    f1 = f2 = 1.0
    if factor == "pi":
        f1 = 1 / np.maximum(s.nsu / radii.R1, 1.0)
        f2 = 1 / np.maximum(s.nsv / radii.R2, 1.0)
    elif factor == "rho":
        f1 = f2 = 1 / np.maximum(np.maximum(s.nsu / radii.R1, s.nsv / radii.R2), 1.0)
    # ||chi_i|| = 1; the order-unit variant has no chi at all
    rel = ">" if strict else ">="
    lab1 = f"inf ||N1|| {rel} r1" + ("" if unit else "/||chi1||")
    lab2 = f"inf ||N2|| {rel} r2" + ("" if unit else "/||chi2||")
    return _entry(cid, [_inf(cid, s, sel1, f1 * s.nmu, r1, strict, lab1),
                        _inf(cid, s, sel2, f2 * s.nmv, r2, strict, lab2)],
                  params={"r1": r1, "r2": r2, "R1": radii.R1, "R2": radii.R2}, samples=s.su.size)


def _chk_boundary_A_or(op, radii, sampler, A):
    r1, r2 = radii.need("r1", "r2")
    s = _c_box(radii, sampler)
    sel = (s.mu < r1) & (s.mv < r2)
    if A is not None:
        sel = sel & np.asarray(A(s.U, s.V), dtype=bool)
    return _entry("boundary-A-or", [_inf("boundary-A-or", s, sel, s.nmu, r1, False, "inf_A ||N1|| >= r1"),
                                    _inf("boundary-A-or", s, sel, s.nmv, r2, False, "inf_A ||N2|| >= r2")],
                  combine="any", samples=s.su.size)


def _chk_no_eigen_rho(op, radii, sampler, A):
    p1, p2 = radii.need("rho1", "rho2")
    s = sampler.box(p1, p2)
    sel = ((s.su == p1) & (s.sv <= p2)) | ((s.su <= p1) & (s.sv == p2))
    Z, NZ = np.hstack([s.U, s.V]), np.hstack([s.NU, s.NV])
    dist = _best_scale(NZ, Z, 1.0)
    return _entry("no-eigen-rho", [_eigen_distance("no-eigen-rho", s, sel, dist, max(p1, p2),
                                                   "N(z) != lambda z, lambda >= 1, on the rho-boundary")],
                  samples=s.su.size)


def _chk_ls_componentwise(op, radii, sampler, A):
    R1, R2 = radii.need("R1", "R2")
    s = sampler.box(R1, R2)
    d1_open, d1_closed = _best_scale(s.NU, s.U, _OPEN), _best_scale(s.NU, s.U, 1.0)
    d2_open, d2_closed = _best_scale(s.NV, s.V, _OPEN), _best_scale(s.NV, s.V, 1.0)
    e1 = np.abs(s.NU - s.U).max(axis=1)
    e2 = np.abs(s.NV - s.V).max(axis=1)
    scale = max(R1, R2)
    a = (s.su == R1) & (s.sv < R2)
    b = (s.su < R1) & (s.sv == R2)
    c = (s.su == R1) & (s.sv == R2)
    both = np.minimum(np.maximum(d1_open, d2_closed), np.maximum(d1_closed, d2_open))
    return _entry("ls-componentwise", [
        _eigen_distance("ls-componentwise", s, a, np.maximum(d1_open, e2), scale,
                        "|u| = R1, |v| < R2: N != (lambda u, v)"),
        _eigen_distance("ls-componentwise", s, b, np.maximum(e1, d2_open), scale,
                        "|u| < R1, |v| = R2: N != (u, lambda v)"),
        _eigen_distance("ls-componentwise", s, c, both, scale,
                        "|u| = R1, |v| = R2: N != (l1 u, l2 v)"),
    ], samples=s.su.size)


def _chk_ls_joint(op, radii, sampler, A):
    R1, R2 = radii.need("R1", "R2")
    s = sampler.box(R1, R2)
    sel = (s.su == R1) | (s.sv == R2)
    dist = _best_scale(np.hstack([s.NU, s.NV]), np.hstack([s.U, s.V]), _OPEN)
    return _entry("ls-joint", [_eigen_distance("ls-joint", s, sel, dist, max(R1, R2),
                                               "N(z) != lambda z, lambda > 1, on the boundary of C")],
                  samples=s.su.size)


def _chk_inner_V(op, radii, sampler, A):
    p1, p2, q1, q2 = radii.need("rho1", "rho2", "varrho1", "varrho2")
    s = sampler.box(p1, p2)
    all_ = np.ones(s.su.shape, dtype=bool)
    return _entry("inner-V", [
        _inf("inner-V", s, (s.mu == q1) & (s.mv >= q2), s.nmu, q1, False, "inf ||N1|| >= varrho1/||chi1||"),
        _inf("inner-V", s, (s.mu >= q1) & (s.mv == q2), s.nmv, q2, False, "inf ||N2|| >= varrho2/||chi2||"),
        _sup("inner-V", s, all_, s.nsu, p1, False, "|N1| <= rho1 on the rho box"),
        _sup("inner-V", s, all_, s.nsv, p2, False, "|N2| <= rho2 on the rho box"),
    ], samples=s.su.size)


def _chk_inner_A_or(op, radii, sampler, A):
    t1, t2, q1, q2 = radii.need("rhot1", "rhot2", "varrho1", "varrho2")
    s = sampler.box(t1, t2)
    sel = (s.mu <= q1) & (s.mv <= q2)
    return _entry("inner-A-or", [_inf("inner-A-or", s, sel, s.nmu, q1, False, "inf ||N1|| >= varrho1"),
                                 _inf("inner-A-or", s, sel, s.nmv, q2, False, "inf ||N2|| >= varrho2")],
                  combine="any", samples=s.su.size)


def _chk_order_unit(op, radii, sampler, A):
    s = sampler.box(1.0, 1.0)
    gap = np.minimum((1.0 - s.U).min(axis=1), (1.0 - s.V).min(axis=1))
    all_ = np.ones(gap.shape, dtype=bool)
    return _entry("order-unit", [_inf("order-unit", s, all_, gap, 0.0, False, "h0 - u >= 0 for |u| <= 1")],
                  params={"h0": "ones"}, samples=s.su.size)


def _chk_iso(cid, op, radii, both):
    r1, r2 = radii.need("r1", "r2")
    z1 = np.zeros((1, op.n1))
    z2 = np.zeros((1, op.n2))
    c1, c2 = r1 * op.chi1[None], r2 * op.chi2[None]
    a = op(c1, c2 if both else z2)[0]
    b = op(c1 if both else z1, c2)[1]
    tag = "(r1 chi1, r2 chi2)" if both else "axis"
    return _entry(cid, [compare(cid, f"||N1|| >= r1/||chi1|| at {tag}", float(op.semi1(a)[0]), ">=", r1, LAB_DELTA),
                        compare(cid, f"||N2|| >= r2/||chi2|| at {tag}", float(op.semi2(b)[0]), ">=", r2, LAB_DELTA)])


_CHECKS = {
    "radii": _chk_radii,
    "radii-unit": _chk_radii_unit,
    "invariance": _chk_invariance,
    "boundary-U": lambda op, r, s, A: _sphere_check("boundary-U", r, s, "U"),
    "boundary-A-or": _chk_boundary_A_or,
    "boundary-U-pi": lambda op, r, s, A: _sphere_check("boundary-U-pi", r, s, "U", factor="pi"),
    "boundary-U-rho": lambda op, r, s, A: _sphere_check("boundary-U-rho", r, s, "U", factor="rho"),
    "boundary-V": lambda op, r, s, A: _sphere_check("boundary-V", r, s, "V"),
    "boundary-V-pi": lambda op, r, s, A: _sphere_check("boundary-V-pi", r, s, "V", factor="pi"),
    "boundary-V-rho": lambda op, r, s, A: _sphere_check("boundary-V-rho", r, s, "V", factor="rho"),
    "boundary-V-strict": lambda op, r, s, A: _sphere_check("boundary-V-strict", r, s, "V", strict=True),
    "seminorm-sphere-strict": lambda op, r, s, A: _sphere_check("seminorm-sphere-strict", r, s, "S", strict=True),
    "no-eigen-rho": _chk_no_eigen_rho,
    "inner-V": _chk_inner_V,
    "inner-A-or": _chk_inner_A_or,
    "order-unit": _chk_order_unit,
    "boundary-U-unit": lambda op, r, s, A: _sphere_check("boundary-U-unit", r, s, "U", strict=True, unit=True),
    "iso-U": lambda op, r, s, A: _chk_iso("iso-U", op, r, False),
    "iso-V": lambda op, r, s, A: _chk_iso("iso-V", op, r, True),
    "ls-componentwise": _chk_ls_componentwise,
    "ls-joint": _chk_ls_joint,
}


# -- brute force -------------------------------------------------------------

@dataclass(frozen=True)
class FixedPoint:
    u: ConeVector
    v: ConeVector
    residual: float

    @property
    def array(self) -> np.ndarray:
        return np.concatenate([self.u.array, self.v.array])


def brute_force_fixed_points(op: LabOperator, bounds: tuple[float, float], grid_resolution: int | None = None,
                             refine_tol: float = 1e-12, max_candidates: int = 2000) -> list[FixedPoint]:
    """Fixed points of ``op`` in ``[0, B1]^n1 x [0, B2]^n2``.

    Grid scan of the Euclidean length of ``N(z) - z`` (the sup norm has flat
    ridges for decoupled maps), every local minimum refined by a Powell hybrid
    root solve on ``N(max(z, 0)) - z``, then deduplicated.
    """
    n1, n2 = op.n1, op.n2
    n = n1 + n2
    B1, B2 = bounds
    k = grid_resolution or max(3, int(SCAN_POINTS ** (1 / n)))
    axes = [np.linspace(0, B1, k)] * n1 + [np.linspace(0, B2, k)] * n2
    grids = np.meshgrid(*axes, indexing="ij")
    Z = np.stack([g.ravel() for g in grids], axis=1)
    NU, NV = op(Z[:, :n1], Z[:, n1:])
    err = np.linalg.norm(np.hstack([NU, NV]) - Z, axis=1).reshape(grids[0].shape)
    local = err == scipy.ndimage.minimum_filter(err, size=3, mode="nearest")
    cand = np.flatnonzero(local.ravel())
    cand = cand[np.argsort(err.ravel()[cand], kind="stable")][:max_candidates]

    def F(z):
        zp = np.maximum(z, 0.0)
        a, b = op(zp[None, :n1], zp[None, n1:])
        return np.concatenate([a[0], b[0]]) - z

    slack = 1e-9 * max(B1, B2, 1.0)
    found: list[np.ndarray] = []
    res_of: list[float] = []
    for idx in cand:
        z0 = Z[idx]
        with np.errstate(all="ignore"):
            sol = scipy.optimize.root(F, z0, method="hybr", options={"xtol": 1e-15})
        z = sol.x
        if not np.all(np.isfinite(z)):
            continue
        z = np.maximum(z, 0.0) if z.min() > -slack else z
        res = float(np.abs(F(z)).max())
        if res > refine_tol * max(1.0, float(np.abs(z).max())) or z.min() < -slack:
            continue
        if z[:n1].max() > B1 + slack or z[n1:].max() > B2 + slack:
            continue
        if any(np.abs(z - w).max() < max(1e3 * refine_tol, 1e-9) for w in found):
            continue
        found.append(z)
        res_of.append(res)
    order = sorted(range(len(found)), key=lambda i: tuple(found[i]))
    return [FixedPoint(ConeVector(found[i][:n1], op.mask1), ConeVector(found[i][n1:], op.mask2), res_of[i])
            for i in order]


# -- theorem validation ------------------------------------------------------

@dataclass
class LabVerdict:
    theorem: str
    verdict: str            # CONFIRMED or NOT-FOUND-AT-RESOLUTION
    hypotheses: list[CatalogEntry]
    fixed_points: list[FixedPoint]
    slots: dict             # slot name -> index into fixed_points or None

    @property
    def confirmed(self) -> bool:
        return self.verdict == "CONFIRMED"

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem, "verdict": self.verdict,
            "hypotheses": [h.to_json() for h in self.hypotheses],
            "fixed_points": [{"u": list(p.u.values), "v": list(p.v.values), "residual": p.residual}
                             for p in self.fixed_points],
            "slots": self.slots,
        }


_EPS = 1e-9


def _ge(a, b):
    return a >= b - _EPS * max(1.0, abs(b))


def _gt(a, b):
    return a > b - _EPS * max(1.0, abs(b))


def _slots(theorem: str, radii: Radii) -> dict[str, Callable[[FixedPoint], bool]]:
    """Named regions that must each contain a distinct fixed point."""
    if theorem == "ladder":
        out = {}
        rungs = radii.rungs
        for j, (r1, r2, R1, R2) in enumerate(rungs, start=1):
            out[f"rung{j}"] = (lambda p, r1=r1, r2=r2, R1=R1, R2=R2:
                               _ge(R1, p.u.sup) and _ge(R2, p.v.sup) and _ge(p.u.semi, r1) and _ge(p.v.semi, r2))
        return out
    r1, r2 = radii.r1, radii.r2
    in_C = lambda p: _ge(radii.R1, p.u.sup) and _ge(radii.R2, p.v.sup)
    if theorem in ("one-solution", "one-solution-pi", "one-solution-rho", "one-solution-A", "order-unit"):
        return {"outside-U": lambda p: in_C(p) and (_ge(p.u.semi, r1) or _ge(p.v.semi, r2))}
    if theorem.startswith("both-nonzero"):
        return {"outside-V": lambda p: in_C(p) and _ge(p.u.semi, r1) and _ge(p.v.semi, r2)}
    p1, p2 = radii.rho1, radii.rho2
    inner = lambda p: p.u.sup < p1 + _EPS and p.v.sup < p2 + _EPS
    if theorem == "three-refined":
        middle = lambda p: (in_C(p) and p.u.semi < r1 + _EPS and p.v.semi < r2 + _EPS
                            and (_gt(p.u.sup, p1) or _gt(p.v.sup, p2)))
    else:
        middle = lambda p: (in_C(p) and (p.u.semi < r1 + _EPS or p.v.semi < r2 + _EPS)
                            and (_gt(p.u.sup, p1) or _gt(p.v.sup, p2)))
    outer = lambda p: in_C(p) and _gt(p.u.semi, r1) and _gt(p.v.semi, r2)
    if theorem == "three-nonzero":
        q1, q2 = radii.varrho1, radii.varrho2
        base = inner
        inner = lambda p: base(p) and _ge(p.u.semi, q1) and _ge(p.v.semi, q2)
    elif theorem == "three-nonzero-or":
        q1, q2, t1, t2 = radii.varrho1, radii.varrho2, radii.rhot1, radii.rhot2
        base = inner
        inner = lambda p: base(p) and (_ge(p.u.semi, q1) or _ge(p.v.semi, q2)
                                       or _gt(p.u.sup, t1) or _gt(p.v.sup, t2))
    return {"inner": inner, "middle": middle, "outer": outer}


def _ladder_hypotheses(op, radii, resolution) -> list[CatalogEntry]:
    rungs = radii.rungs
    if not rungs:
        raise LabError("ladder needs at least one rung")
    out = []
    for j, (r1, r2, R1, R2) in enumerate(rungs, start=1):
        rr = Radii(r1=r1, r2=r2, R1=R1, R2=R2)
        parts = [compare("radii", "r1 <= ||phi1|| ||chi1|| R1", r1, "<=", R1, LAB_DELTA),
                 compare("radii", "r2 <= ||phi2|| ||chi2|| R2", r2, "<=", R2, LAB_DELTA)]
        if j < len(rungs):
            nr1, nr2 = rungs[j][0], rungs[j][1]
            parts += [compare("radii", "c1 R1 < next r1", R1, "<", nr1, LAB_DELTA),
                      compare("radii", "c2 R2 < next r2", R2, "<", nr2, LAB_DELTA)]
        entries = [_entry("radii", parts)] + check_conditions(op, rr, ("boundary-V", "invariance"), resolution)
        out += [replace(e, id=f"rung{j}.{e.id}") for e in entries]
    return out


def _ladder_extra(op, radii, resolution) -> tuple[list[CatalogEntry], dict]:
    """Strict conditions that yield the solutions between consecutive rungs."""
    rungs = radii.rungs
    entries, slots = [], {}
    for j in range(len(rungs) - 1):
        r1, r2, R1, R2 = rungs[j]
        nr1, nr2, nR1, nR2 = rungs[j + 1]
        checks = []
        for (a1, a2, b1, b2) in ((r1, r2, R1, R2), (nr1, nr2, nR1, nR2)):
            sampler = _Sampler(op, Radii(r1=a1, r2=a2, R1=b1, R2=b2), resolution)
            s = sampler.box(a1, a2)
            checks += [_inf("strict", s, (s.mu == a1) & (s.mv >= a2), s.nmu, a1, True, "inf ||N1|| > r1 (|z| <= r)"),
                       _inf("strict", s, (s.mu >= a1) & (s.mv == a2), s.nmv, a2, True, "inf ||N2|| > r2 (|z| <= r)")]
            t = sampler.box(b1, b2)
            all_ = np.ones(t.su.shape, dtype=bool)
            checks += [_sup("strict", t, all_, t.nsu, b1, True, "sup |N1| < R1"),
                       _sup("strict", t, all_, t.nsv, b2, True, "sup |N2| < R2")]
        entries.append(_entry(f"rung{j + 1}.upper-strict", checks))
        slots[f"between{j + 1}"] = (lambda p, R1=R1, R2=R2, nr1=nr1, nr2=nr2, nR1=nR1, nR2=nR2:
                                    p.u.sup < nR1 + _EPS and p.v.sup < nR2 + _EPS
                                    and (_gt(p.u.sup, R1) or _gt(p.v.sup, R2))
                                    and (p.u.semi < nr1 + _EPS or p.v.semi < nr2 + _EPS))
    return entries, slots


def _match(points: list[FixedPoint], slots: dict) -> dict:
    names = list(slots)
    if not names:
        return {}
    cost = np.ones((len(names), max(len(points), 1)))
    for i, name in enumerate(names):
        for j, p in enumerate(points):
            if slots[name](p):
                cost[i, j] = 0.0
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    out = {name: None for name in names}
    for i, j in zip(rows, cols):
        if cost[i, j] == 0.0 and j < len(points):
            out[names[i]] = int(j)
    return out


def validate_theorem(theorem: str, op: LabOperator, radii: Radii, resolution: int = 9,
                     grid_resolution: int | None = None, A: Callable | None = None) -> LabVerdict:
    """Check hypotheses, then look for the promised fixed points by brute force.

    Raises :class:`HypothesisError` when a hypothesis fails, so a conclusion is
    never "validated" vacuously.
    """
    if theorem not in THEOREMS:
        raise LabError(f"unknown theorem {theorem!r}; choose from {', '.join(THEOREMS)}")
    if theorem == "ladder":
        hyps = _ladder_hypotheses(op, radii, resolution)
        bounds = radii.rungs[-1][2:]
    else:
        hyps = check_conditions(op, radii, THEOREMS[theorem], resolution, A)
        bounds = (radii.R1, radii.R2)
    failed = [h for h in hyps if not h.verdict]
    if failed:
        raise HypothesisError(theorem, failed)
    slots = _slots(theorem, radii)
    if theorem == "ladder":
        extra, extra_slots = _ladder_extra(op, radii, resolution)
        hyps += extra
        if extra and all(e.verdict for e in extra):
            slots.update(extra_slots)
    if theorem == "one-solution-A" and A is not None:
        base = slots["outside-U"]
        slots["outside-U"] = lambda p: (base(p) or not bool(
            A(p.u.array[None], p.v.array[None])[0])) and _ge(radii.R1, p.u.sup) and _ge(radii.R2, p.v.sup)
    points = brute_force_fixed_points(op, bounds, grid_resolution)
    assigned = _match(points, slots)
    verdict = "CONFIRMED" if all(v is not None for v in assigned.values()) else "NOT-FOUND-AT-RESOLUTION"
    return LabVerdict(theorem, verdict, hyps, points, assigned)


# -- fixtures ---------------------------------------------------------------

@dataclass(frozen=True)
class Fixture:
    name: str
    op: LabOperator
    radii: Radii
    theorems: tuple          # theorems whose hypotheses are expected to hold
    expected_points: tuple = ()


def fixtures() -> list[Fixture]:
    """Small operators with known fixed points."""
    out = []
    R = (2.0, 3.0)
    out.append(Fixture("constant", LabOperator.from_exprs(["2"], ["3"], name="constant"),
                       Radii(r1=1, r2=1, R1=R[0], R2=R[1]),
                       ("one-solution", "both-nonzero", "one-solution-pi", "one-solution-rho"),
                       (((2.0,), (3.0,)),)))
    out.append(Fixture("zero", LabOperator.from_exprs(["0"], ["0"], name="zero"),
                       Radii(r1=1, r2=1, R1=2, R2=2), (), (((0.0,), (0.0,)),)))
    gold = ((1 + 5 ** 0.5) / 2) ** 2
    out.append(Fixture("sqrt", LabOperator.from_exprs(["sqrt(u)+1"], ["sqrt(v)+1"], name="sqrt", isotone=True),
                       Radii(r1=1, r2=1, R1=9, R2=9),
                       ("one-solution", "both-nonzero", "one-solution-pi", "one-solution-rho",
                        "both-nonzero-pi", "both-nonzero-rho", "order-unit"),
                       (((gold,), (gold,)),)))
    out.append(Fixture("contraction", LabOperator.from_exprs(["u/2+1"], ["v/2+1"], name="contraction", isotone=True),
                       Radii(r1=1, r2=1, R1=4, R2=4),
                       ("one-solution", "both-nonzero", "order-unit"), (((2.0,), (2.0,)),)))
    out.append(Fixture("three", LabOperator.from_exprs(["9*u^2/(u^2+8)"], ["9*v^2/(v^2+8)"], name="three",
                                                       isotone=True),
                       Radii(r1=2, r2=2, R1=9, R2=9, rho1=0.5, rho2=0.5),
                       ("both-nonzero", "three"),
                       tuple(((a,), (b,)) for a in (0.0, 1.0, 8.0) for b in (0.0, 1.0, 8.0))))
    out.append(Fixture("coupled", LabOperator.from_exprs(["sqrt(u1)+1", "(u1+u2)/4+1"], ["sqrt(v)+1"],
                                                         mask1=[True, False], name="coupled", isotone=True),
                       Radii(r1=1, r2=1, R1=9, R2=9),
                       ("one-solution", "both-nonzero"),
                       (((gold, (gold / 4 + 1) * 4 / 3), (gold,)),)))
    step = "1+3*{0}^8/({0}^8+2.5^8)"
    out.append(Fixture("ladder", LabOperator.from_exprs([step.format("u")], [step.format("v")], name="ladder",
                                                        isotone=True),
                       Radii(rungs=((0.5, 0.5, 1.5, 1.5), (3.0, 3.0, 5.0, 5.0))),
                       ("ladder",)))
    return out


def swap_operator() -> LabOperator:
    """``N(u, v) = (v, u)``: every diagonal point is fixed."""
    return LabOperator(1, 1, lambda U, V: V.copy(), lambda U, V: U.copy(), name="swap", isotone=True)
