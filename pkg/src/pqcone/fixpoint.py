"""Fixed points of ``N(u, v) = (S_p(lam*f(x,u,v)), S_q(lam*g(x,u,v)))``.

A pair is a discrete solution of the Dirichlet system exactly when it is a
fixed point of ``N``.  This module iterates ``N`` (damped Picard, or monotone
iteration for isotone nonlinearities, plus Newton-Krylov for repelling fixed
points that no iteration reaches), sorts what it finds into the regions
of the three-solution picture and checks the promised localization.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import plap
from .certify import ConditionRecord, ProblemSpec, SpecError, compare
from .grid import GridFunction, seminorm, sup_norm

log = logging.getLogger(__name__)

DEFAULT_FP_TOL = 1e-9
N_RANDOM_SEEDS = 8
N_AMPLITUDES = 7


@dataclass
class SolutionRecord:
    u: GridFunction = field(repr=False)
    v: GridFunction = field(repr=False)
    sup_u: float
    sup_v: float
    semi_u: float
    semi_v: float
    residual: float
    region: str
    iterations: int
    seed: str
    converged: bool = True
    zero_u: bool = False
    zero_v: bool = False

    @property
    def nontrivial(self) -> bool:
        return not (self.zero_u and self.zero_v)

    def to_json(self) -> dict:
        return {
            "seed": self.seed, "region": self.region, "converged": self.converged,
            "iterations": self.iterations, "residual": self.residual,
            "sup_u": self.sup_u, "sup_v": self.sup_v,
            "seminorm_u": self.semi_u, "seminorm_v": self.semi_v,
            "zero_u": self.zero_u, "zero_v": self.zero_v,
            "min_interior_u": float(self.u.values[self.u.domain.interior].min()),
            "min_interior_v": float(self.v.values[self.v.domain.interior].min()),
        }


class MonotonicityError(RuntimeError):
    """Monotone iteration produced a non-monotone step (wrong isotonicity declaration)."""

    def __init__(self, message: str, step: int, amount: float):
        super().__init__(message)
        self.step = step
        self.amount = amount


# -- the operator --------------------------------------------------------------

def _nonneg(a) -> np.ndarray:
    return np.maximum(np.asarray(a, dtype=float), 0.0)


def superposition(spec: ProblemSpec, u, v) -> tuple[np.ndarray, np.ndarray]:
    """Nodal values of ``lam*f(x,u,v)`` and ``lam*g(x,u,v)``."""
    d = spec.domain
    env = dict(zip(("x", "y"), d.coords()))
    env["u"], env["v"] = _nonneg(u), _nonneg(v)
    F = np.broadcast_to(spec.lam * np.asarray(spec.f.eval(env)), d.shape)
    G = np.broadcast_to(spec.lam * np.asarray(spec.g.eval(env)), d.shape)
    return F, G


def apply_N(u, v, spec: ProblemSpec, cfg: plap.SolverConfig = plap.SolverConfig(),
            warm: bool = False) -> tuple[GridFunction, GridFunction]:
    """``N(u, v)``; with ``warm`` the current pair is used as the Newton starting point."""
    F, G = superposition(spec, u, v)
    d = spec.domain
    init_u = u if warm and spec.p != 2 and sup_norm(u) > 0 else None
    init_v = v if warm and spec.q != 2 and sup_norm(v) > 0 else None
    Nu = plap.solve(d.function(F), cfg.with_r(spec.p), initial=init_u)
    Nv = plap.solve(d.function(G), cfg.with_r(spec.q), initial=init_v)
    return Nu, Nv


def fixed_point_residual(u, v, spec, cfg=plap.SolverConfig()) -> float:
    """``|N(u,v) - (u,v)|`` with cold solves, so a fixed point cannot vouch for itself."""
    Nu, Nv = apply_N(u, v, spec, cfg)
    return max(sup_norm(Nu.values - np.asarray(u)), sup_norm(Nv.values - np.asarray(v)))


# -- region bookkeeping ----------------------------------------------------------

def classify(sup_u, sup_v, semi_u, semi_v, spec: ProblemSpec, zero_u=False, zero_v=False) -> str:
    """Region of the three-solution picture.

    ``inner``: |u| < rho1 and |v| < rho2.  ``middle``: ||u|| < r1 and ||v|| < r2
    with |u| > rho1 or |v| > rho2.  ``outer``: ||u|| > r1 and ||v|| > r2.
    Anything else (e.g. one seminorm above its radius, the other below) is
    ``outside``: the theorem makes no claim there.
    """
    if zero_u and zero_v:
        return "inner"
    have_rho = spec.rho1 is not None and spec.rho2 is not None
    if have_rho and sup_u < spec.rho1 and sup_v < spec.rho2:
        return "inner"
    if spec.r1 is None or spec.r2 is None:
        return "outside"
    if semi_u > spec.r1 and semi_v > spec.r2:
        return "outer"
    beyond_rho = not have_rho or sup_u > spec.rho1 or sup_v > spec.rho2
    if semi_u < spec.r1 and semi_v < spec.r2 and beyond_rho:
        return "middle"
    return "outside"


def make_record(u, v, spec, cfg, iterations, seed, fp_tol, converged=True) -> SolutionRecord:
    u = spec.domain.function(np.asarray(u, dtype=float))
    v = spec.domain.function(np.asarray(v, dtype=float))
    res = fixed_point_residual(u, v, spec, cfg)
    su, sv = sup_norm(u), sup_norm(v)
    zu, zv = su < 10 * fp_tol, sv < 10 * fp_tol
    mu = seminorm(u, spec.domain.cone(1))
    mv = seminorm(v, spec.domain.cone(2))
    region = classify(su, sv, mu, mv, spec, zu, zv)
    return SolutionRecord(u, v, su, sv, mu, mv, res, region, iterations, seed,
                          converged and res < fp_tol, zu, zv)


# -- iterations ---------------------------------------------------------------

def picard(seed, spec: ProblemSpec, cfg: plap.SolverConfig = plap.SolverConfig(),
           max_iters: int = 500, fp_tol: float = DEFAULT_FP_TOL, theta: float = 1.0,
           label: str = "seed") -> SolutionRecord:
    """Damped Picard iteration ``z <- (1-theta) z + theta N(z)``.

    ``theta`` is halved whenever the residual grows.  The returned record has
    ``converged=False`` if ``max_iters`` is exhausted.
    """
    u, v = (np.asarray(a, dtype=float) for a in seed)
    u, v = _nonneg(u), _nonneg(v)
    prev = np.inf
    for k in range(max_iters + 1):
        Nu, Nv = apply_N(u, v, spec, cfg)
        res = max(sup_norm(Nu.values - u), sup_norm(Nv.values - v))
        if not np.isfinite(res):
            break
        if res < fp_tol:
            return make_record(u, v, spec, cfg, k, label, fp_tol)
        if res > prev and theta > 2.0 ** -10:
            theta /= 2
        prev = res
        u = (1 - theta) * u + theta * Nu.values
        v = (1 - theta) * v + theta * Nv.values
    log.info("picard from %s did not converge (residual %.3e)", label, res)
    return make_record(u, v, spec, cfg, max_iters, label, fp_tol, converged=False)


def _require_isotone(spec: ProblemSpec):
    missing = [f"{h}.{w}" for h in "fg" for w in "uv" if spec.direction(h, w) != "increasing"]
    if missing:
        raise SpecError("monotone iteration needs f and g declared increasing in u and v; "
                        f"not declared: {', '.join(missing)}", "monotone")


def monotone_iterate(direction: str, spec: ProblemSpec, cfg: plap.SolverConfig = plap.SolverConfig(),
                     max_iters: int = 500, fp_tol: float = DEFAULT_FP_TOL,
                     seed=None) -> SolutionRecord:
    """Plain iteration of an isotone ``N`` from ``(r1 chi1, r2 chi2)`` (below) or ``(R1, R2)`` (above).

    Each step is checked to move in the expected order direction; a step
    going the wrong way by more than the solver noise raises
    :class:`MonotonicityError`.
    """
    if direction not in ("below", "above"):
        raise ValueError("direction must be 'below' or 'above'")
    _require_isotone(spec)
    d = spec.domain
    if seed is None:
        if direction == "below":
            if spec.r1 is None or spec.r2 is None:
                raise SpecError("from-below iteration needs r1, r2", "r1")
            seed = (spec.r1 * d.d1.astype(float), spec.r2 * d.d2.astype(float))
        else:
            if spec.R1 is None or spec.R2 is None:
                raise SpecError("from-above iteration needs R1, R2", "R1")
            seed = (np.full(d.shape, spec.R1), np.full(d.shape, spec.R2))
    u, v = (np.asarray(a, dtype=float) for a in seed)
    sign = 1.0 if direction == "below" else -1.0
    for k in range(max_iters + 1):
        Nu, Nv = apply_N(u, v, spec, cfg)
        du, dv = Nu.values - u, Nv.values - v
        slack = max(10 * fp_tol, 1e-9 * max(1.0, sup_norm(u), sup_norm(v)))
        worst = min(float((sign * du).min()), float((sign * dv).min()))
        if worst < -slack:
            raise MonotonicityError(
                f"iteration from {direction} moved the wrong way by {-worst:.3e} at step {k}", k, -worst)
        res = max(sup_norm(du), sup_norm(dv))
        if res < fp_tol:
            return make_record(u, v, spec, cfg, k, f"monotone-{direction}", fp_tol)
        u, v = Nu.values, Nv.values
    return make_record(u, v, spec, cfg, max_iters, f"monotone-{direction}", fp_tol, converged=False)


# -- multiplicity -------------------------------------------------------------

def _bump(d) -> np.ndarray:
    bump = np.ones(d.shape)
    for c, L in zip(d.coords(), d.lengths):
        bump = bump * np.sin(np.pi * c / L)
    return np.abs(bump)


def newton(seed, spec: ProblemSpec, cfg: plap.SolverConfig = plap.SolverConfig(),
           max_iters: int = 100, fp_tol: float = DEFAULT_FP_TOL, label: str = "seed") -> SolutionRecord:
    """Newton-Krylov on ``N(z+) - z``; reaches fixed points that repel Picard."""
    m = int(np.prod(spec.domain.shape))
    shape = spec.domain.shape

    def F(z):
        u = np.maximum(z[:m], 0).reshape(shape)
        v = np.maximum(z[m:], 0).reshape(shape)
        Nu, Nv = apply_N(u, v, spec, cfg)
        return np.concatenate([Nu.values.ravel() - z[:m], Nv.values.ravel() - z[m:]])

    z0 = np.concatenate([np.asarray(a, dtype=float).ravel() for a in seed])
    sol = optimize.root(F, z0, method="krylov", options={"fatol": fp_tol / 100, "maxiter": max_iters})
    u = np.maximum(sol.x[:m], 0).reshape(shape)
    v = np.maximum(sol.x[m:], 0).reshape(shape)
    return make_record(u, v, spec, cfg, int(sol.get("nit", 0)), label, fp_tol)


def newton_seeds(spec: ProblemSpec, found: list[SolutionRecord]):
    """Amplitude pairs ``(t1 * bump, t2 * bump)``, then amplitude ladders in one
    component paired with each distinct component already found in the other."""
    d = spec.domain
    bump = _bump(d)
    lo1 = min(x for x in (spec.rho1, spec.r1, 1.0) if x is not None) / 10
    lo2 = min(x for x in (spec.rho2, spec.r2, 1.0) if x is not None) / 10
    amps1 = np.geomspace(lo1, spec.R1 or 10.0, N_AMPLITUDES)
    amps2 = np.geomspace(lo2, spec.R2 or 10.0, N_AMPLITUDES)
    for t1 in amps1:
        for t2 in amps2:
            yield f"newton-u{t1:.3g}-v{t2:.3g}", (t1 * bump, t2 * bump)
    vs = _distinct([d.zeros().values] + [r.v.values for r in found])
    us = _distinct([d.zeros().values] + [r.u.values for r in found])
    for t in amps1:
        for j, v in enumerate(vs):
            yield f"newton-u{t:.3g}-v{j}", (t * bump, v)
    for t in amps2:
        for j, u in enumerate(us):
            yield f"newton-v{t:.3g}-u{j}", (u, t * bump)


def _distinct(arrays, tol=1e-6):
    out = []
    for a in arrays:
        if all(sup_norm(a - b) > tol for b in out):
            out.append(a)
    return out


def _random_cone_seeds(spec: ProblemSpec, count: int, rng: np.random.Generator):
    d = spec.domain
    bump = _bump(d)
    R1 = spec.R1 if spec.R1 is not None else 1.0
    R2 = spec.R2 if spec.R2 is not None else 1.0
    for j in range(count):
        a, b = rng.random(2)
        wu = bump * (0.5 + 0.5 * rng.random(d.shape))
        wv = bump * (0.5 + 0.5 * rng.random(d.shape))
        yield f"random-{j}", (a * R1 * wu, b * R2 * wv)


def seed_schedule(spec: ProblemSpec, seed: int = 0):
    """Fixed, documented list of ``(label, (u0, v0), method)``."""
    d = spec.domain
    chi1, chi2 = d.d1.astype(float), d.d2.astype(float)
    one = np.ones(d.shape)
    out = [("zero", (d.zeros().values, d.zeros().values), "picard")]
    if spec.varrho1 is not None and spec.varrho2 is not None:
        out.append(("varrho-chi", (spec.varrho1 * chi1, spec.varrho2 * chi2), "picard"))
    if spec.rho1 is not None and spec.rho2 is not None:
        out.append(("half-rho-chi", (0.5 * spec.rho1 * chi1, 0.5 * spec.rho2 * chi2), "picard"))
        out.append(("rho-chi", (spec.rho1 * chi1, spec.rho2 * chi2), "picard"))
    isotone = all(spec.direction(h, w) == "increasing" for h in "fg" for w in "uv")
    if spec.r1 is not None and spec.r2 is not None:
        out.append(("r-chi", (spec.r1 * chi1, spec.r2 * chi2), "below" if isotone else "picard"))
    if spec.R1 is not None and spec.R2 is not None:
        out.append(("R-one", (spec.R1 * one, spec.R2 * one), "above" if isotone else "picard"))
        out.append(("R-one-u-axis", (spec.R1 * one, 0 * one), "picard"))
        out.append(("R-one-v-axis", (0 * one, spec.R2 * one), "picard"))
    rng = np.random.default_rng(seed)
    out += [(lab, s, "picard") for lab, s in _random_cone_seeds(spec, N_RANDOM_SEEDS, rng)]
    return out


def _dedup(records: list[SolutionRecord], tol: float) -> list[SolutionRecord]:
    kept: list[SolutionRecord] = []
    for r in records:
        if any(max(sup_norm(r.u.values - k.u.values), sup_norm(r.v.values - k.v.values)) < tol for k in kept):
            continue
        kept.append(r)
    return kept


@dataclass
class SearchResult:
    records: list[SolutionRecord]
    attempts: list[dict]
    regions: dict

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]


def multiplicity_search(spec: ProblemSpec, consts=None, cfg: plap.SolverConfig = plap.SolverConfig(),
                        fp_tol: float = DEFAULT_FP_TOL, max_iters: int = 500, seed: int = 0,
                        dedup_tol: float | None = None, use_newton: bool | None = None) -> SearchResult:
    """Run the seed schedule, keep converged distinct fixed points, label regions.

    With ``use_newton`` a second stage runs Newton-Krylov from
    :func:`newton_seeds`, which finds the repelling fixed points as well.
    The default enables it only for ``p = q = 2``, where each ``N``
    evaluation is a pair of cached linear solves.

    ``consts`` is accepted for symmetry with the certificates but not needed:
    the fixed points do not depend on the constants.
    """
    dedup_tol = 100 * fp_tol if dedup_tol is None else dedup_tol
    if use_newton is None:
        use_newton = spec.p == 2 and spec.q == 2
    found, attempts = [], []
    for label, s, method in seed_schedule(spec, seed):
        try:
            if method == "picard":
                rec = picard(s, spec, cfg, max_iters, fp_tol, label=label)
            else:
                rec = monotone_iterate(method, spec, cfg, max_iters, fp_tol, seed=s)
                rec.seed = label
        except (plap.SolverError, MonotonicityError) as err:
            attempts.append({"seed": label, "method": method, "outcome": f"error: {err}"})
            continue
        attempts.append({"seed": label, "method": method, "converged": rec.converged,
                         "residual": rec.residual, "iterations": rec.iterations,
                         "region": rec.region if rec.converged else None})
        if rec.converged:
            found.append(rec)
    if use_newton:
        for label, s in list(newton_seeds(spec, _dedup(found, dedup_tol))):
            try:
                rec = newton(s, spec, cfg, fp_tol=fp_tol, label=label)
            except plap.SolverError as err:
                attempts.append({"seed": label, "method": "newton", "outcome": f"error: {err}"})
                continue
            attempts.append({"seed": label, "method": "newton", "converged": rec.converged,
                             "residual": rec.residual, "iterations": rec.iterations,
                             "region": rec.region if rec.converged else None})
            if rec.converged:
                found.append(rec)
    kept = _dedup(found, dedup_tol)
    regions = {name: sum(1 for r in kept if r.region == name) for name in ("inner", "middle", "outer", "outside")}
    return SearchResult(kept, attempts, regions)


def check_localization(rec: SolutionRecord, spec: ProblemSpec, tol: float = 0.0) -> list[ConditionRecord]:
    """Norm bounds, seminorm bounds and interior positivity of a converged record.

    ``tol`` is an absolute slack added in favour of each bound.
    """
    out = []
    if spec.R1 is not None:
        out.append(compare("sup-u", "|u| <= R1", rec.sup_u, "<=", spec.R1 + tol, spec.delta))
    if spec.R2 is not None:
        out.append(compare("sup-v", "|v| <= R2", rec.sup_v, "<=", spec.R2 + tol, spec.delta))
    if spec.r1 is not None:
        out.append(compare("seminorm-u", "||u|| >= r1", rec.semi_u, ">=", spec.r1 - tol, spec.delta))
    if spec.r2 is not None:
        out.append(compare("seminorm-v", "||v|| >= r2", rec.semi_v, ">=", spec.r2 - tol, spec.delta))
    interior = spec.domain.interior
    for name, comp, zero in (("u", rec.u, rec.zero_u), ("v", rec.v, rec.zero_v)):
        if zero:
            continue
        low = float(comp.values[interior].min())
        out.append(compare(f"positive-{name}", f"min interior {name} > 0", low, ">", 0.0, 0.0))
    return out
