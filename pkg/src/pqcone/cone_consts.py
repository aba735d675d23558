"""Localization constants, the two cone retractions and a Harnack-ratio probe.

For exponent ``r`` and subset ``D``:

    A_r      = 1 / |S_r(1)|^(r-1)
    B_{D,r}  = 1 / ||S_r(chi_D)||^(r-1)
    lambda_r = first Dirichlet eigenvalue of -Delta_r

and on every grid the sandwich ``A_r <= lambda_r <= B_{D,r}`` should hold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import plap
from .grid import ConeSpec, GridDomain, GridFunction, seminorm, sup_norm


@dataclass(frozen=True)
class ConstantSet:
    p: float
    q: float
    A_p: float
    A_q: float
    B_1p: float
    B_2q: float
    lambda_1p: float
    lambda_1q: float
    norm_one_1: float = 1.0
    norm_one_2: float = 1.0
    grid: dict = field(default_factory=dict)
    solver_tol: float = 0.0

    def sandwich(self) -> dict:
        """Margins of ``A <= lambda <= B`` for both exponents (nonnegative means it holds)."""
        return {
            "p": {"lower": self.lambda_1p - self.A_p, "upper": self.B_1p - self.lambda_1p},
            "q": {"lower": self.lambda_1q - self.A_q, "upper": self.B_2q - self.lambda_1q},
        }

    def sandwich_holds(self, tol: float = 0.0) -> bool:
        return all(m >= -tol for side in self.sandwich().values() for m in side.values())

    def to_json(self) -> dict:
        return {
            "p": self.p, "q": self.q,
            "A_p": self.A_p, "A_q": self.A_q,
            "B_1p": self.B_1p, "B_2q": self.B_2q,
            "lambda_1p": self.lambda_1p, "lambda_1q": self.lambda_1q,
            "norm_one_1": self.norm_one_1, "norm_one_2": self.norm_one_2,
            "solver_tol": self.solver_tol,
            "grid": dict(self.grid),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ConstantSet":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def torsion_constant(domain: GridDomain, r: float, cfg: plap.SolverConfig) -> float:
    u = plap.solve(domain.constant(1.0), cfg.with_r(r))
    return 1.0 / sup_norm(u) ** (r - 1)


def harnack_constant(domain: GridDomain, r: float, which, cfg: plap.SolverConfig) -> float:
    D = domain.cone(which)
    u = plap.solve(D.indicator, cfg.with_r(r))
    return 1.0 / seminorm(u, D) ** (r - 1)


def compute_constants(domain: GridDomain, p: float, q: float,
                      cfg: plap.SolverConfig = plap.SolverConfig()) -> ConstantSet:
    """A, B and first eigenvalues for both exponents on ``domain``."""
    cache: dict = {}

    def memo(key, fn):
        if key not in cache:
            cache[key] = fn()
        return cache[key]

    A_p = memo(("A", p), lambda: torsion_constant(domain, p, cfg))
    A_q = memo(("A", q), lambda: torsion_constant(domain, q, cfg))
    same_D = np.array_equal(domain.d1, domain.d2)
    B_1p = memo(("B", 1, p), lambda: harnack_constant(domain, p, 1, cfg))
    B_2q = memo(("B", 1 if same_D else 2, q), lambda: harnack_constant(domain, q, 2, cfg))
    lam_p = memo(("L", p), lambda: plap.first_eigenvalue(p, domain, cfg).eigenvalue)
    lam_q = memo(("L", q), lambda: plap.first_eigenvalue(q, domain, cfg).eigenvalue)
    return ConstantSet(float(p), float(q), A_p, A_q, B_1p, B_2q, lam_p, lam_q,
                       grid=domain.metadata(), solver_tol=cfg.tol)


# -- retractions ---------------------------------------------------------

def _scale(u, c: float):
    if hasattr(u, "scaled"):
        return u.scaled(c)
    return np.asarray(u, dtype=float) * c


def retraction_pi(u, R: float):
    """Radial retraction onto ``{|u| <= R}``."""
    n = sup_norm(u)
    if n <= R:
        return u
    return _scale(u, R / n)


def retraction_rho(pair, R1: float, R2: float):
    """Joint retraction ``(u, v) / max(|u|/R1, |v|/R2, 1)``."""
    u, v = pair
    m = max(sup_norm(u) / R1, sup_norm(v) / R2, 1.0)
    if m == 1.0:
        return u, v
    return _scale(u, 1 / m), _scale(v, 1 / m)


# -- Harnack ratio -------------------------------------------------------

def _trapezoid_weights(domain: GridDomain, mask: np.ndarray) -> np.ndarray:
    """Tensor trapezoid weights on the bounding box of ``mask``, zero outside it."""
    w = np.ones(domain.shape)
    for axis, h in enumerate(domain.spacing):
        others = tuple(a for a in range(domain.dim) if a != axis)
        idx = np.nonzero(mask.any(axis=others) if others else mask)[0]
        wa = np.zeros(domain.shape[axis])
        wa[idx[0]:idx[-1] + 1] = h
        if idx[-1] > idx[0]:
            wa[idx[0]] = wa[idx[-1]] = h / 2
        shape = [1] * domain.dim
        shape[axis] = -1
        w = w * wa.reshape(shape)
    return w * mask


def rhs_catalog(domain: GridDomain, D: ConeSpec, count: int, seed: int = 0) -> list[GridFunction]:
    """Fixed list of nonnegative right-hand sides: constant, indicators, then seeded random fields."""
    out = [domain.constant(1.0), D.indicator]
    coords = domain.coords()
    bump = np.ones(domain.shape)
    for c, L in zip(coords, domain.lengths):
        bump = bump * np.sin(math.pi * c / L)
    out.append(domain.function(np.abs(bump)))
    rng = np.random.default_rng(seed)
    while len(out) < count:
        raw = rng.random(domain.shape)
        # a few passes of neighbour averaging so the fields are not pure noise
        for _ in range(4):
            sm = raw.copy()
            for axis in range(domain.dim):
                sm += np.roll(raw, 1, axis) + np.roll(raw, -1, axis)
            raw = sm / (1 + 2 * domain.dim)
        out.append(domain.function(raw))
    return out[:count]


def ratio_of(u, D: ConeSpec, s: float) -> float:
    a = np.asarray(u, dtype=float)
    w = _trapezoid_weights(D.domain, D.mask)
    integral = float(np.sum(w * np.abs(a) ** s)) ** (1 / s)
    return seminorm(u, D) / integral


def harnack_ratio(samples: int, domain: GridDomain, p: float, s: float, D: ConeSpec,
                  cfg: plap.SolverConfig = plap.SolverConfig(), seed: int = 0) -> float:
    """Smallest ``inf_D u / (int_D u^s)^(1/s)`` over ``u = S_p(w)`` for catalog right-hand sides ``w``.

    This is an empirical upper estimate of the best constant in a weak Harnack
    inequality, not a bound.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if samples < 1:
        raise ValueError("need at least one sample")
    best = math.inf
    for w in rhs_catalog(domain, D, samples, seed):
        u = plap.solve(w, cfg.with_r(p))
        best = min(best, ratio_of(u, D, s))
    return best
