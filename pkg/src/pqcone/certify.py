"""Inequality certificates for existence, localization, multiplicity and nonexistence.

Each check compares a box extremum of ``lambda*f`` or ``lambda*g`` against a
power of a radius times one of the constants ``A``, ``B`` or ``lambda_1``:

    upper   max_{closure x [0,R1] x [0,R2]} f / R1^(p-1)  <=  A_p
    lower   min_{D1 x [r1,R1] x [0,R2]}     f / r1^(p-1)  >   B_1p

(and the same for ``g`` with ``q``, ``D2`` and the roles of ``u``/``v``
swapped).  Extrema over ``u``/``v`` are exact corner evaluations when the
expression is declared monotone in that variable and sampled otherwise;
every record says which.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import expr as ex
from .cone_consts import ConstantSet
from .grid import GridDomain

MONOTONE = ("increasing", "decreasing", "unknown")
# relative safety band separating strict inequalities from ties
DEFAULT_DELTA = 1e-9
DEFAULT_RESOLUTION = 33
# geometric samples toward u = 0 / v = 0 for the nonexistence checks
_NEAR_ZERO_LEVELS = 40
_CHUNK = 1 << 21


class SpecError(ValueError):
    """A problem spec violates a precondition; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class ProblemSpec:
    domain: GridDomain
    p: float
    q: float
    f: ex.Expr
    g: ex.Expr
    r1: float | None = None
    r2: float | None = None
    R1: float | None = None
    R2: float | None = None
    rho1: float | None = None        # inner radii of the three-solution theorem
    rho2: float | None = None
    varrho1: float | None = None     # optional innermost radii
    varrho2: float | None = None
    Rt1: float | None = None         # R-tilde of the one-sided theorem
    Rt2: float | None = None
    rhot1: float | None = None       # rho-tilde of the one-sided refinement
    rhot2: float | None = None
    lam: float = 1.0
    monotone: dict = field(default_factory=dict)  # {("f","u"): "increasing", ...}
    resolution: int = DEFAULT_RESOLUTION
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        for name in ("f", "g"):
            e = getattr(self, name)
            if not isinstance(e, ex.Expr):
                object.__setattr__(self, name, ex.parse(e))
        mono = {}
        for key, val in dict(self.monotone).items():
            if isinstance(key, str):
                key = tuple(key.split("."))
            if len(key) != 2 or key[0] not in ("f", "g") or key[1] not in ("u", "v"):
                raise SpecError(f"bad monotonicity key {key!r}", "monotone")
            if val not in MONOTONE:
                raise SpecError(f"monotonicity must be one of {MONOTONE}, got {val!r}", "monotone")
            mono[key] = val
        object.__setattr__(self, "monotone", mono)
        if self.resolution < 2:
            raise SpecError("sampling resolution must be >= 2", "resolution")
        if not self.lam > 0:
            raise SpecError("lambda must be positive", "lam")
        if not self.delta >= 0:
            raise SpecError("delta must be nonnegative", "delta")
        lower = 2 * self.domain.dim / (self.domain.dim + 1)
        for name in ("p", "q"):
            if not getattr(self, name) > lower:
                raise SpecError(f"{name}={getattr(self, name)} must exceed 2n/(n+1)={lower:g}", name)
        for name in ("r1", "r2", "R1", "R2", "rho1", "rho2", "varrho1", "varrho2",
                     "Rt1", "Rt2", "rhot1", "rhot2"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise SpecError(f"{name} must be positive", name)

    def expr(self, which: str) -> ex.Expr:
        return self.f if which == "f" else self.g

    def direction(self, which: str, var: str) -> str:
        return self.monotone.get((which, var), "unknown")

    def with_(self, **kw) -> "ProblemSpec":
        return replace(self, **kw)

    def radii(self) -> dict:
        keys = ("r1", "r2", "R1", "R2", "rho1", "rho2", "varrho1", "varrho2", "Rt1", "Rt2", "rhot1", "rhot2")
        return {k: getattr(self, k) for k in keys if getattr(self, k) is not None}


@dataclass
class ConditionRecord:
    id: str
    relation: str
    lhs: float
    rhs: float
    sense: str            # one of "<=", "<", ">", ">="
    margin: float
    verdict: bool
    sampling: str
    witness: dict | None = None

    def to_json(self) -> dict:
        return {
            "condition": self.id, "relation": self.relation,
            "lhs": self.lhs, "rhs": self.rhs, "sense": self.sense,
            "margin": self.margin, "verdict": "PASS" if self.verdict else "FAIL",
            "sampling": self.sampling, "witness": self.witness,
        }


@dataclass
class CertificateReport:
    theorem: str
    conditions: list[ConditionRecord]
    verdict: bool
    constants: ConstantSet | None
    sampling: dict = field(default_factory=dict)
    conclusion: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def record(self, cid: str) -> ConditionRecord:
        for c in self.conditions:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def failed(self) -> list[str]:
        return [c.id for c in self.conditions if not c.verdict]

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "verdict": "PASS" if self.verdict else "FAIL",
            "conditions": [c.to_json() for c in self.conditions],
            "conclusion": list(self.conclusion),
            "details": self.details,
            "constants": self.constants.to_json() if self.constants else None,
            "sampling": self.sampling,
        }

    def __str__(self) -> str:
        lines = [f"{self.theorem}: {'PASS' if self.verdict else 'FAIL'}"]
        for c in self.conditions:
            lines.append(f"  {c.id:<24} {c.lhs:.6g} {c.sense} {c.rhs:.6g}  margin={c.margin:+.3e}"
                         f"  {'PASS' if c.verdict else 'FAIL'}  [{c.sampling}]")
        return "\n".join(lines)


def compare(cid: str, relation: str, lhs: float, sense: str, rhs: float,
            delta: float = DEFAULT_DELTA, sampling: str = "", witness=None) -> ConditionRecord:
    """Build a record whose margin sign reproduces the verdict.

    Non-strict relations get a tolerance of ``delta`` (relative); strict ones
    must clear it.  Verdict is ``margin >= 0`` for non-strict and
    ``margin > 0`` for strict relations.
    """
    if sense not in ("<=", "<", ">", ">="):
        raise ValueError(f"bad relation {sense!r}")
    raw = rhs - lhs if sense in ("<=", "<") else lhs - rhs
    band = delta * max(abs(lhs), abs(rhs), 1e-300)
    if sense in ("<", ">"):
        margin = raw - band
        ok = margin > 0
    else:
        margin = raw + band
        ok = margin >= 0
    return ConditionRecord(cid, relation, float(lhs), float(rhs), sense, float(margin), bool(ok), sampling, witness)


# -- box extrema -------------------------------------------------------------

@dataclass(frozen=True)
class Extremum:
    value: float
    point: dict
    method: str
    low: float   # smallest sampled value, for the nonnegativity check
    high: float

    def __float__(self):
        return self.value


def _region_points(domain: GridDomain, spatial, e: ex.Expr) -> tuple[np.ndarray, ...]:
    mask = domain.mask(spatial)
    coords = [c[mask] for c in domain.coords()]
    if not e.depends_on("x", "y"):
        coords = [c[:1] for c in coords]
    return tuple(coords)


def _var_samples(lo: float, hi: float, direction: str, used: bool, k: int) -> tuple[np.ndarray, bool]:
    if hi < lo:
        raise SpecError(f"empty range [{lo}, {hi}]")
    if not used or hi == lo:
        return np.array([lo]), True
    if direction in ("increasing", "decreasing"):
        return np.array([lo, hi]), True
    return np.linspace(lo, hi, k), False


def _env(coords, us, vs, lam):
    names = ("x", "y")[: len(coords)]
    env = {}
    for n, c in zip(names, coords):
        env[n] = c[:, None, None]
    env["u"] = us[None, :, None]
    env["v"] = vs[None, None, :]
    return env


def _evaluate_blocks(e: ex.Expr, coords, us, vs, lam: float, box_desc: str):
    """Yield ``(values, index_offset)`` over spatial chunks; values have shape (m, |us|, |vs|)."""
    per = max(1, _CHUNK // max(1, us.size * vs.size))
    n = coords[0].size
    for start in range(0, n, per):
        part = tuple(c[start:start + per] for c in coords)
        env = _env(part, us, vs, lam)
        try:
            val = e.eval(env)
        except ex.EvalDomainError as err:
            raise ex.EvalDomainError(f"{err.reason} on box {box_desc}", err.subexpr) from err
        val = lam * np.broadcast_to(val, (part[0].size, us.size, vs.size))
        yield val, start


def _point(coords, us, vs, idx) -> dict:
    i, a, b = idx
    pt = {n: float(c[i]) for n, c in zip(("x", "y"), coords)}
    pt["u"] = float(us[a])
    pt["v"] = float(vs[b])
    return pt


def box_search(e: ex.Expr, spatial, u_range, v_range, mode: str, spec: ProblemSpec,
               which: str | None = None, scale: float = 1.0) -> Extremum:
    """Extremum of ``scale * e`` over ``region x u_range x v_range`` with the sampling method used."""
    if mode not in ("min", "max"):
        raise ValueError("mode must be 'min' or 'max'")
    k = spec.resolution
    du = spec.direction(which, "u") if which else "unknown"
    dv = spec.direction(which, "v") if which else "unknown"
    us, exact_u = _var_samples(*map(float, u_range), du, e.depends_on("u"), k)
    vs, exact_v = _var_samples(*map(float, v_range), dv, e.depends_on("v"), k)
    coords = _region_points(spec.domain, spatial, e)
    desc = f"{spatial} x [{u_range[0]:g},{u_range[1]:g}] x [{v_range[0]:g},{v_range[1]:g}]"
    best, best_pt = (math.inf if mode == "min" else -math.inf), None
    lo, hi = math.inf, -math.inf
    for vals, off in _evaluate_blocks(e, coords, us, vs, scale, desc):
        lo = min(lo, float(vals.min()))
        hi = max(hi, float(vals.max()))
        j = int(vals.argmin() if mode == "min" else vals.argmax())
        v = float(vals.flat[j])
        if (mode == "min" and v < best) or (mode == "max" and v > best):
            i, a, b = np.unravel_index(j, vals.shape)
            best, best_pt = v, _point(coords, us, vs, (off + i, a, b))
    if exact_u and exact_v:
        method = "corner evaluation"
    else:
        method = f"sampled at resolution {k}"
        if exact_u or exact_v:
            method += " (corners in " + ("u" if exact_u else "v") + ")"
    return Extremum(best, best_pt, method, lo, hi)


def box_extremum(e, spatial, u_range, v_range, mode: str, spec: ProblemSpec,
                 which: str | None = None) -> float:
    """``min``/``max`` of ``e`` over ``region x [a,b] x [c,d]``; see :func:`box_search`."""
    if not isinstance(e, ex.Expr):
        e = ex.parse(e)
    return box_search(e, spatial, u_range, v_range, mode, spec, which).value


# -- condition builders --------------------------------------------------------

def _exps(spec, which):
    return spec.p if which == "f" else spec.q


def _region(which):
    return 1 if which == "f" else 2


def _extremum(spec, which, spatial, ur, vr, mode):
    e = spec.expr(which)
    res = box_search(e, spatial, ur, vr, mode, spec, which, scale=spec.lam)
    if res.low < 0:
        raise SpecError(f"{which} takes the negative value {res.low:.6g} on {spatial} x {ur} x {vr}", which)
    return res


def upper_check(cid, spec, consts, which, R1, R2, strict=False) -> ConditionRecord:
    """``max lam*h / R^(r-1) <= A`` over the closure times ``[0,R1] x [0,R2]``."""
    r = _exps(spec, which)
    R = R1 if which == "f" else R2
    A = consts.A_p if which == "f" else consts.A_q
    res = _extremum(spec, which, "closure", (0.0, R1), (0.0, R2), "max")
    lhs = res.value / R ** (r - 1)
    rel = f"max {which} on closure x [0,{R1:g}] x [0,{R2:g}] / {R:g}^{r - 1:g}"
    return compare(cid, rel, lhs, "<" if strict else "<=", A, spec.delta, res.method, res.point)


def lower_check(cid, spec, consts, which, ur, vr, radius) -> ConditionRecord:
    """``min lam*h / radius^(r-1) > B`` over ``D_i x ur x vr``."""
    r = _exps(spec, which)
    B = consts.B_1p if which == "f" else consts.B_2q
    res = _extremum(spec, which, _region(which), ur, vr, "min")
    lhs = res.value / radius ** (r - 1)
    rel = (f"min {which} on D{_region(which)} x [{ur[0]:g},{ur[1]:g}] x [{vr[0]:g},{vr[1]:g}]"
           f" / {radius:g}^{r - 1:g}")
    return compare(cid, rel, lhs, ">", B, spec.delta, res.method, res.point)


def _require(spec, *names):
    for n in names:
        if getattr(spec, n) is None:
            raise SpecError(f"radius {n} is required", n)


def _order(spec, chain: Sequence[str]):
    vals = [getattr(spec, n) for n in chain]
    for (a, x), (b, y) in zip(zip(chain, vals), zip(chain[1:], vals[1:])):
        if not x < y:
            raise SpecError(f"need {a} < {b}, got {x:g} >= {y:g}", a)


def _sampling(spec) -> dict:
    return {"resolution": spec.resolution, "delta": spec.delta, "lambda": spec.lam,
            "monotone": {f"{k[0]}.{k[1]}": v for k, v in sorted(spec.monotone.items())}}


# -- theorems -----------------------------------------------------------------

def certify_existence(spec: ProblemSpec, consts: ConstantSet) -> CertificateReport:
    """Positive solution with ``|u|<=R1, |v|<=R2, ||u||>=r1, ||v||>=r2``."""
    _require(spec, "r1", "r2", "R1", "R2")
    _order(spec, ("r1", "R1"))
    _order(spec, ("r2", "R2"))
    R1, R2, r1, r2 = spec.R1, spec.R2, spec.r1, spec.r2
    recs = [
        upper_check("upper.f", spec, consts, "f", R1, R2),
        upper_check("upper.g", spec, consts, "g", R1, R2),
        lower_check("lower.f", spec, consts, "f", (r1, R1), (0.0, R2), r1),
        lower_check("lower.g", spec, consts, "g", (0.0, R1), (r2, R2), r2),
    ]
    ok = all(r.verdict for r in recs)
    concl = [f"|u| <= {R1:g}", f"|v| <= {R2:g}", f"||u|| >= {r1:g}", f"||v|| >= {r2:g}"] if ok else []
    return CertificateReport("existence", recs, ok, consts, _sampling(spec), concl)


def certify_existence_or(spec: ProblemSpec, consts: ConstantSet) -> CertificateReport:
    """Nontrivial solution localised by ``||u||>=r1 or ||v||>=r2 or |u|>Rt1 or |v|>Rt2``."""
    _require(spec, "r1", "r2", "R1", "R2")
    _order(spec, ("r1", "R1"))
    _order(spec, ("r2", "R2"))
    Rt1 = spec.Rt1 if spec.Rt1 is not None else spec.R1
    Rt2 = spec.Rt2 if spec.Rt2 is not None else spec.R2
    if Rt1 > spec.R1 or Rt2 > spec.R2:
        raise SpecError("tilde radii must not exceed R1, R2", "Rt1" if Rt1 > spec.R1 else "Rt2")
    recs = [
        upper_check("upper.f", spec, consts, "f", spec.R1, spec.R2),
        upper_check("upper.g", spec, consts, "g", spec.R1, spec.R2),
        lower_check("lower-or.f", spec, consts, "f", (0.0, Rt1), (0.0, Rt2), spec.r1),
        lower_check("lower-or.g", spec, consts, "g", (0.0, Rt1), (0.0, Rt2), spec.r2),
    ]
    fired = [r.id for r in recs[2:] if r.verdict]
    ok = recs[0].verdict and recs[1].verdict and bool(fired)
    concl = []
    if ok:
        concl = [f"|u| <= {spec.R1:g}", f"|v| <= {spec.R2:g}",
                 f"||u|| >= {spec.r1:g} or ||v|| >= {spec.r2:g} or |u| > {Rt1:g} or |v| > {Rt2:g}"]
    return CertificateReport("existence-or", recs, ok, consts, _sampling(spec), concl,
                             {"disjuncts_fired": fired, "Rt1": Rt1, "Rt2": Rt2})


def certify_three_solutions(spec: ProblemSpec, consts: ConstantSet) -> CertificateReport:
    """Three nonnegative solutions: near zero, in the middle shell, and beyond ``r``."""
    _require(spec, "rho1", "rho2", "r1", "r2", "R1", "R2")
    _order(spec, ("rho1", "r1", "R1"))
    _order(spec, ("rho2", "r2", "R2"))
    R1, R2, r1, r2, p1, p2 = spec.R1, spec.R2, spec.r1, spec.r2, spec.rho1, spec.rho2
    recs = [
        upper_check("upper.f", spec, consts, "f", R1, R2),
        upper_check("upper.g", spec, consts, "g", R1, R2),
        upper_check("upper-rho.f", spec, consts, "f", p1, p2, strict=True),
        upper_check("upper-rho.g", spec, consts, "g", p1, p2, strict=True),
        lower_check("lower.f", spec, consts, "f", (r1, R1), (0.0, R2), r1),
        lower_check("lower.g", spec, consts, "g", (0.0, R1), (r2, R2), r2),
    ]
    ok = all(r.verdict for r in recs)
    concl = []
    if ok:
        concl = [
            f"(u1,v1): |u1| < {p1:g}, |v1| < {p2:g} (possibly zero)",
            f"(u2,v2): ||u2|| < {r1:g}, ||v2|| < {r2:g}, |u2| > {p1:g} or |v2| > {p2:g}",
            f"(u3,v3): ||u3|| > {r1:g}, ||v3|| > {r2:g} (both components nonzero)",
            f"all: |u| <= {R1:g}, |v| <= {R2:g}",
        ]
    details: dict = {}
    if spec.varrho1 is not None or spec.varrho2 is not None:
        _require(spec, "varrho1", "varrho2")
        _order(spec, ("varrho1", "rho1"))
        _order(spec, ("varrho2", "rho2"))
        v1, v2 = spec.varrho1, spec.varrho2
        part_i = [
            lower_check("inner.f", spec, consts, "f", (v1, p1), (0.0, p2), v1),
            lower_check("inner.g", spec, consts, "g", (0.0, p1), (v2, p2), v2),
        ]
        rt1 = spec.rhot1 if spec.rhot1 is not None else p1
        rt2 = spec.rhot2 if spec.rhot2 is not None else p2
        if rt1 > p1 or rt2 > p2:
            raise SpecError("rho-tilde must not exceed rho", "rhot1" if rt1 > p1 else "rhot2")
        part_ii = [
            lower_check("inner-or.f", spec, consts, "f", (0.0, rt1), (0.0, rt2), v1),
            lower_check("inner-or.g", spec, consts, "g", (0.0, rt1), (0.0, rt2), v2),
        ]
        recs += part_i + part_ii
        i_ok = all(r.verdict for r in part_i)
        ii_ok = any(r.verdict for r in part_ii)
        details["inner"] = {"verdict": "PASS" if i_ok else "FAIL"}
        details["inner-or"] = {"verdict": "PASS" if ii_ok else "FAIL",
                               "disjuncts_fired": [r.id for r in part_ii if r.verdict],
                               "rhot1": rt1, "rhot2": rt2}
        if ok and i_ok:
            concl.append(f"(u1,v1): ||u1|| >= {v1:g} and ||v1|| >= {v2:g}")
        if ok and ii_ok:
            concl.append(f"(u1,v1): ||u1|| >= {v1:g} or ||v1|| >= {v2:g} or |u1| > {rt1:g} or |v1| > {rt2:g}")
    return CertificateReport("three", recs, ok, consts, _sampling(spec), concl, details)


def certify_n_solutions(spec: ProblemSpec, rungs: Sequence[tuple[tuple[float, float], tuple[float, float]]],
                        consts: ConstantSet) -> CertificateReport:
    """Ladder of radius pairs ``((r1, r2), (R1, R2))``, innermost first.

    Every rung must pass the existence conditions; rung ``j < n`` whose upper
    bound also holds strictly contributes one additional solution between
    rungs ``j`` and ``j+1``.
    """
    if not rungs:
        raise SpecError("ladder needs at least one rung", "ladder")
    for j, ((r1, r2), (R1, R2)) in enumerate(rungs):
        if not (0 < r1 < R1 and 0 < r2 < R2):
            raise SpecError(f"rung {j + 1}: need 0 < r < R", "ladder")
        if j + 1 < len(rungs):
            (s1, s2), _ = rungs[j + 1]
            if not (R1 < s1 and R2 < s2):
                raise SpecError(f"rungs {j + 1} and {j + 2} overlap: need R^j < r^(j+1)", "ladder")
    recs: list[ConditionRecord] = []
    base_ok = True
    extra = 0
    per_rung = []
    for j, ((r1, r2), (R1, R2)) in enumerate(rungs, start=1):
        s = spec.with_(r1=r1, r2=r2, R1=R1, R2=R2)
        rr = [
            upper_check(f"rung{j}.upper.f", s, consts, "f", R1, R2),
            upper_check(f"rung{j}.upper.g", s, consts, "g", R1, R2),
            lower_check(f"rung{j}.lower.f", s, consts, "f", (r1, R1), (0.0, R2), r1),
            lower_check(f"rung{j}.lower.g", s, consts, "g", (0.0, R1), (r2, R2), r2),
        ]
        recs += rr
        rung_ok = all(r.verdict for r in rr)
        base_ok &= rung_ok
        strict_ok = None
        if j < len(rungs):
            st = [
                upper_check(f"rung{j}.upper-strict.f", s, consts, "f", R1, R2, strict=True),
                upper_check(f"rung{j}.upper-strict.g", s, consts, "g", R1, R2, strict=True),
            ]
            recs += st
            strict_ok = all(r.verdict for r in st)
        per_rung.append({"rung": j, "verdict": "PASS" if rung_ok else "FAIL", "strict_upper": strict_ok})
    if base_ok:
        extra = sum(1 for r in per_rung if r["strict_upper"])
    n = len(rungs) if base_ok else 0
    concl = []
    if base_ok:
        for j, ((r1, r2), (R1, R2)) in enumerate(rungs, start=1):
            concl.append(f"solution {j}: |u| <= {R1:g}, |v| <= {R2:g}, ||u|| >= {r1:g}, ||v|| >= {r2:g}")
        for r in per_rung:
            if r["strict_upper"]:
                j = r["rung"]
                concl.append(f"additional solution between rungs {j} and {j + 1}")
    return CertificateReport("ladder", recs, base_ok, consts, _sampling(spec), concl,
                             {"rungs": per_rung, "guaranteed": n, "additional": extra, "total": n + extra})


def _positive_samples(lo: float, hi: float, k: int) -> np.ndarray:
    """Samples of ``(lo, hi]`` (``[lo, hi]`` if ``lo > 0``) with geometric refinement toward 0."""
    if hi <= 0 or hi < lo:
        raise SpecError(f"check box range [{lo}, {hi}] has no positive values", "check_box")
    lin = np.linspace(lo, hi, k)
    if lo == 0:
        geo = hi * 2.0 ** -np.arange(1, _NEAR_ZERO_LEVELS + 1)
        lin = np.concatenate([geo, lin])
    return np.unique(lin[lin > 0])


def _pointwise(cid, spec, which, region, us, vs, sense, coef, name, var):
    """Check ``lam*h(x,u,v) <sense> coef * w^(r-1)`` at every sample, ``w`` = u or v."""
    e = spec.expr(which)
    r = _exps(spec, which)
    mask = spec.domain.mask(region)
    coords = tuple(c[mask] for c in spec.domain.coords())
    if not e.depends_on("x", "y"):
        coords = tuple(c[:1] for c in coords)
    worst, witness, wl, wr = math.inf, None, 0.0, 0.0
    for vals, off in _evaluate_blocks(e, coords, us, vs, spec.lam, f"{region}"):
        w = us[None, :, None] if var == "u" else vs[None, None, :]
        rhs = np.broadcast_to(coef * w ** (r - 1), vals.shape)
        diff = rhs - vals if sense == "<" else vals - rhs
        band = spec.delta * np.maximum(np.abs(vals), np.abs(rhs))
        m = diff - band
        j = int(m.argmin())
        if m.flat[j] < worst:
            worst = float(m.flat[j])
            idx = np.unravel_index(j, m.shape)
            witness = _point(coords, us, vs, (off + idx[0], idx[1], idx[2]))
            wl, wr = float(vals[idx]), float(rhs[idx])
    ok = worst > 0
    rel = f"{which} {sense} {name} {var}^{r - 1:g} on {region}"
    rec = ConditionRecord(cid, rel, wl, wr, sense, worst, bool(ok),
                          f"sampled at resolution {spec.resolution} plus {_NEAR_ZERO_LEVELS} levels toward 0",
                          None if ok else witness)
    if ok:
        rec.witness = {"tightest": witness}
    return rec


def certify_nonexistence(spec: ProblemSpec, consts: ConstantSet,
                         check_box: tuple[tuple[float, float], tuple[float, float]]) -> CertificateReport:
    """Sufficient conditions for ``u = 0`` / ``v = 0``, verified on a bounded box only."""
    (u0, u1), (v0, v1) = check_box
    if not (u1 > u0 >= 0 and v1 > v0 >= 0):
        raise SpecError("check box must be nonempty and nonnegative", "check_box")
    k = spec.resolution
    us_pos, vs_pos = _positive_samples(u0, u1, k), _positive_samples(v0, v1, k)
    us_all, vs_all = np.linspace(u0, u1, k), np.linspace(v0, v1, k)
    lp, lq, B1, B2 = consts.lambda_1p, consts.lambda_1q, consts.B_1p, consts.B_2q
    recs = [
        _pointwise("f-below-eigen", spec, "f", "interior", us_pos, vs_all, "<", lp, "lambda_1p", "u"),
        _pointwise("f-above-eigen", spec, "f", "interior", us_pos, vs_all, ">", lp, "lambda_1p", "u"),
        _pointwise("f-above-harnack", spec, "f", 1, us_pos, vs_all, ">", B1, "B_1p", "u"),
        _pointwise("g-below-eigen", spec, "g", "interior", us_all, vs_pos, "<", lq, "lambda_1q", "v"),
        _pointwise("g-above-eigen", spec, "g", "interior", us_all, vs_pos, ">", lq, "lambda_1q", "v"),
        _pointwise("g-above-harnack", spec, "g", 2, us_all, vs_pos, ">", B2, "B_2q", "v"),
    ]
    u_zero = [r.id for r in recs[:3] if r.verdict]
    v_zero = [r.id for r in recs[3:] if r.verdict]
    no_positive = bool(u_zero or v_zero)
    no_nontrivial = bool(u_zero and v_zero)
    concl = []
    if u_zero:
        concl.append("every nonnegative solution has u = 0 (on box)")
    if v_zero:
        concl.append("every nonnegative solution has v = 0 (on box)")
    if no_positive:
        concl.append("no positive solutions (on box)")
    if no_nontrivial:
        concl.append("no nontrivial nonnegative solutions (on box)")
    details = {
        "check_box": [[u0, u1], [v0, v1]],
        "no_positive": "PASS" if no_positive else "FAIL",
        "no_nontrivial": "PASS" if no_nontrivial else "FAIL",
        "u_conditions_holding": u_zero, "v_conditions_holding": v_zero,
    }
    return CertificateReport("nonexistence", recs, no_positive, consts, _sampling(spec), concl, details)


THEOREMS = ("existence", "existence-or", "three", "ladder", "nonexistence")


def report_json(report: CertificateReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True)
