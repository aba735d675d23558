"""Worked example: ``f = phi * u^2/(4+u^3)``, ``g = psi * atan(v)^2`` with a <= phi <= b, c <= psi <= d.

With ``A = A_2`` and ``B = B_{1,2} = B_{2,2}`` the outer and inner radii are

    R1(lam) = lam * l1 * b / A,   R2(lam) = lam * l2 * d / A,   r1 = 1/sqrt(R1),

``r2`` is fixed, and ``lam0`` is the smallest ``lam`` (to bisection tolerance)
for which the sufficient inequalities below hold.  Only ``p = q = 2`` makes
sense here since the radii are tied to the Laplacian constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certify import ProblemSpec, SpecError
from .cone_consts import ConstantSet

L1 = 1.0 / 3.0
L2 = math.pi ** 2 / 4


def Phi(x):
    return x * x / (4 + x ** 3)


def Psi(x):
    return math.atan(x) ** 2


class BracketError(RuntimeError):
    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class ScenarioParams:
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    d: float = 1.0
    r2: float = 0.1
    lam_lo: float = 1.0
    lam_hi: float = 2.0 ** 30
    rel_tol: float = 1e-10
    phi: str | None = None   # expression in x, y, u, v; default the constant b
    psi: str | None = None   # default the constant d

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "r2", "lam_lo"):
            if not getattr(self, name) > 0:
                raise SpecError(f"{name} must be positive", name)
        if self.a > self.b:
            raise SpecError("need a <= b", "a")
        if self.c > self.d:
            raise SpecError("need c <= d", "c")
        if not self.lam_hi > self.lam_lo:
            raise SpecError("lambda bracket must be increasing", "lam_hi")

    @property
    def gamma_factor(self) -> float:
        return L1 * self.b / self.a

    def f_source(self) -> str:
        return f"({self.phi if self.phi is not None else repr(self.b)})*u^2/(4+u^3)"

    def g_source(self) -> str:
        return f"({self.psi if self.psi is not None else repr(self.d)})*atan(v)^2"


@dataclass
class ScenarioPoint:
    lam: float
    R1: float
    R2: float
    r1: float
    r2: float
    rho1: float | None
    rho2: float | None
    margins: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(m > 0 for m in self.margins.values()) and self.rho1 is not None and self.rho2 is not None

    def to_json(self) -> dict:
        return {"lambda": self.lam, "R1": self.R1, "R2": self.R2, "r1": self.r1, "r2": self.r2,
                "rho1": self.rho1, "rho2": self.rho2, "margins": self.margins, "ok": self.ok}


def _choose_rho(r: float, bound: float, ratio, cap: float = math.inf, max_halvings: int = 200):
    """Largest ``r * 2^-k`` (k >= 1) with ``ratio(rho) < bound`` and ``rho < cap``."""
    rho = r
    for _ in range(max_halvings):
        rho /= 2
        if rho < cap and ratio(rho) < bound:
            return rho
    return None


def evaluate(lam: float, P: ScenarioParams, A: float, B: float) -> ScenarioPoint:
    R1 = lam * L1 * P.b / A
    R2 = lam * L2 * P.d / A
    r1 = 1 / math.sqrt(R1)
    r2 = P.r2
    gamma = P.gamma_factor * B / A
    s = math.sqrt(R1)
    margins = {
        "exa3-u": (R1 / r1) * min(Phi(r1), Phi(R1)) - gamma,
        "exa3-v": Psi(r2) / r2 - B / (lam * P.c),
        "exa3-limit": min(R1 * s / (1 + 4 * R1 * s), R1 ** 3 / (4 + R1 ** 3)) - gamma / s,
        "r1<R1": R1 - r1,
        "r2<R2": R2 - r2,
    }
    rho1 = _choose_rho(r1, A / (lam * P.b), lambda x: Phi(x) / x, cap=2.0)
    rho2 = _choose_rho(r2, A / (lam * P.d), lambda x: Psi(x) / x)
    if rho1 is not None:
        margins["exa2-u"] = A / (lam * P.b) - Phi(rho1) / rho1
    if rho2 is not None:
        margins["exa2-v"] = A / (lam * P.d) - Psi(rho2) / rho2
    return ScenarioPoint(lam, R1, R2, r1, r2, rho1, rho2, margins)


def find_lambda0(P: ScenarioParams, A: float, B: float) -> tuple[float, list[ScenarioPoint]]:
    """Doubling bracket from ``lam_lo`` then bisection; returns ``lam0`` and the doubling trace."""
    trace = []
    lo, hi = None, P.lam_lo
    while True:
        pt = evaluate(hi, P, A, B)
        trace.append(pt)
        if pt.ok:
            break
        lo = hi
        hi *= 2
        if hi > P.lam_hi:
            raise BracketError(f"no admissible lambda in [{P.lam_lo:g}, {P.lam_hi:g}]", trace)
    if lo is None:
        return hi, trace
    while hi - lo > P.rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if evaluate(mid, P, A, B).ok:
            hi = mid
        else:
            lo = mid
    return hi, trace


def problem_at(point: ScenarioPoint, P: ScenarioParams, domain, **kw) -> ProblemSpec:
    """Problem at ``point.lam`` with the scenario radii."""
    return ProblemSpec(domain, 2.0, 2.0, P.f_source(), P.g_source(),
                       r1=point.r1, r2=point.r2, R1=point.R1, R2=point.R2,
                       rho1=point.rho1, rho2=point.rho2, lam=point.lam, **kw)


def check_bounds(P: ScenarioParams, domain, k: int = 9) -> None:
    """``a <= phi <= b`` and ``c <= psi <= d`` on the grid nodes times a (u, v) sample."""
    from . import expr as ex
    coords = np.meshgrid(*domain.axes(), np.geomspace(1e-3, 1e3, k), np.geomspace(1e-3, 1e3, k), indexing="ij")
    names = ("x", "y")[: domain.dim] + ("u", "v")
    env = dict(zip(names, coords))
    for src, lo, hi, name in ((P.phi, P.a, P.b, "phi"), (P.psi, P.c, P.d, "psi")):
        if src is None:
            continue
        vals = np.asarray(ex.parse(src).eval(env), dtype=float)
        if vals.min() < lo or vals.max() > hi:
            raise SpecError(f"{name} leaves [{lo:g}, {hi:g}] (range {vals.min():g}..{vals.max():g})", name)


def constants_for(consts: ConstantSet) -> tuple[float, float]:
    if consts.p != 2 or consts.q != 2:
        raise SpecError("the worked example is posed for p = q = 2", "exponents")
    return consts.A_p, consts.B_1p
