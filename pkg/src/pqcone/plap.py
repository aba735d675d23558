"""Discrete Dirichlet p-Laplacian: the solution operator ``S_r = (-Delta_r)^{-1}``
and the first eigenpair.

The operator is the gradient of the discrete energy

    J(u) = sum_e w_e |grad_e u|^r / r  -  V * sum_i v_i u_i

where ``grad_e`` is a difference quotient on the edges of the 1D grid, or the
(constant) gradient on each of the two right triangles of every 2D cell, and
``V`` is the nodal volume.  For ``r = 2`` this is the standard 3-point / 5-point
Laplacian.  Solving ``-Delta_r u = v`` is a strictly convex minimisation, done by
damped Newton on the regularised energy with weights ``(|g|^2 + eps^2)^((r-2)/2)``
and ``eps`` halved from ``eps0`` down to ``eps_min``.

Solver residuals are the sup norm of the energy gradient ``dJ/du_i`` over
interior nodes (``V`` times the discrete ``-Delta_r u - v``).  For ``r != 2`` the
tolerance is applied after scaling the right-hand side to ``max|v| = 1``
(by homogeneity), so it is relative to the size of the data.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import GridDomain, GridFunction, sup_norm

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Raised when a nonlinear solve or eigen iteration fails to converge."""

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(f"{message} (best residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SolverConfig:
    r: float = 2.0
    tol: float = 1e-10
    max_iter: int = 2000
    eps0: float | None = None  # None: max |grad u0| of the warm start
    eps_min: float = 1e-10
    stage_iter: int = 40
    eig_tol: float = 1e-12
    eig_max_iter: int = 500
    normalize: bool = True     # solve at max|v| = 1 and rescale (r != 2)

    def with_r(self, r: float) -> "SolverConfig":
        return replace(self, r=float(r))

    def validate(self, dim: int = 1) -> None:
        lower = 2 * dim / (dim + 1)
        if not self.r > lower:
            raise ValueError(f"exponent r={self.r} must exceed 2n/(n+1)={lower:g} for n={dim}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.eps_min < 0:
            raise ValueError("eps_min must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass
class SolveInfo:
    residual: float
    iterations: int
    energies: list[float] = field(default_factory=list)  # regularised energy at each stage end
    eps: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class EigenResult:
    eigenvalue: float
    eigenfunction: GridFunction
    residual: float          # |lambda_k - lambda_{k-1}| at termination
    equation_residual: float  # sup |-Delta_r u - lambda u^{r-1}| over interior nodes
    iterations: int


# -- discrete gradient operator ----------------------------------------

@dataclass(frozen=True)
class _Stencil:
    G: sp.csr_matrix      # (k*E, n_int): stacked gradient components
    w: np.ndarray         # (E,) element weights
    k: int                # gradient components per element
    V: float              # nodal volume
    interior: np.ndarray  # flat indices of interior nodes
    n_nodes: int


_STENCILS: dict[tuple, _Stencil] = {}
_LAPLACE_LU: dict[tuple, object] = {}

# continuation may go this many halvings below eps_min when the bias of the
# regularisation still exceeds the tolerance
_EXTRA_HALVINGS = 20


def _diff(n: int, h: float) -> sp.csr_matrix:
    return sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n), format="csr") / h


def _sel(n: int, shift: int) -> sp.csr_matrix:
    return sp.eye(n - 1, n, k=shift, format="csr")


def stencil(domain: GridDomain) -> _Stencil:
    st = _STENCILS.get(domain.key)
    if st is not None:
        return st
    interior = np.flatnonzero(domain.interior.ravel())
    if domain.dim == 1:
        (n,), (h,) = domain.shape, domain.spacing
        G_full = _diff(n, h)
        w = np.full(n - 1, h)
        k = 1
    else:
        (nx, ny), (hx, hy) = domain.shape, domain.spacing
        Dx, Dy = _diff(nx, hx), _diff(ny, hy)
        gx = sp.vstack([sp.kron(Dx, _sel(ny, 0)), sp.kron(Dx, _sel(ny, 1))])
        gy = sp.vstack([sp.kron(_sel(nx, 0), Dy), sp.kron(_sel(nx, 1), Dy)])
        G_full = sp.vstack([gx, gy])
        w = np.full(2 * (nx - 1) * (ny - 1), 0.5 * hx * hy)
        k = 2
    G = sp.csr_matrix(G_full.tocsc()[:, interior])
    st = _Stencil(G, w, k, domain.node_volume, interior, int(np.prod(domain.shape)))
    _STENCILS[domain.key] = st
    return st


def _grads(st: _Stencil, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = (st.G @ x).reshape(st.k, -1)
    return g, (g * g).sum(axis=0)


def _energy(st, x, b, r, eps):
    _, s = _grads(st, x)
    return float(np.dot(st.w, (s + eps * eps) ** (r / 2)) / r - st.V * np.dot(b, x))


def _gradient(st, x, b, r, eps):
    g, s = _grads(st, x)
    if eps == 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            phi = np.where(s > 0, s ** ((r - 2) / 2), 0.0)
    else:
        phi = (s + eps * eps) ** ((r - 2) / 2)
    flux = (st.w * phi * g).ravel()
    return st.G.T @ flux - st.V * b


def _hessian(st, x, r, eps):
    g, s = _grads(st, x)
    t = s + eps * eps
    a = st.w * t ** ((r - 2) / 2)
    c = st.w * (r - 2) * t ** ((r - 4) / 2)
    if st.k == 1:
        H = sp.diags(a + c * g[0] ** 2)
    else:
        gx, gy = g
        H = sp.bmat([[sp.diags(a + c * gx * gx), sp.diags(c * gx * gy)],
                     [sp.diags(c * gx * gy), sp.diags(a + c * gy * gy)]])
    return (st.G.T @ H @ st.G).tocsc()


def _spd_solve(K, rhs, dim):
    if dim == 1:
        ab = np.zeros((2, K.shape[0]))
        ab[1] = K.diagonal(0)
        ab[0, 1:] = K.diagonal(1)
        return scipy.linalg.solveh_banded(ab, rhs, check_finite=False)
    return spla.spsolve(K, rhs)


def _line_search(st, x, d, b, r, eps, grad):
    """Backtracking step length, or None if no acceptable step was found.

    Near the minimum the energy decrease drops below float64 resolution, so a
    step whose energy change is lost in roundoff is accepted when it reduces
    the sup norm of the gradient instead.
    """
    J0 = _energy(st, x, b, r, eps)
    slope = float(np.dot(grad, d))
    g0 = float(np.abs(grad).max())
    noise = 64 * np.finfo(float).eps * max(abs(J0), float(np.dot(st.w, _grads(st, x)[1] ** (r / 2)) / r))
    t = 1.0
    for _ in range(60):
        J = _energy(st, x + t * d, b, r, eps)
        if J <= J0 + 1e-4 * t * slope:
            return t
        if abs(J - J0) <= noise and np.abs(_gradient(st, x + t * d, b, r, eps)).max() < g0:
            return t
        t *= 0.5
    return None


def residual(u, v, domain: GridDomain, r: float) -> float:
    """Sup norm of the discrete ``-Delta_r u - v`` over interior nodes."""
    st = stencil(domain)
    x = np.asarray(u, dtype=float).ravel()[st.interior]
    b = np.broadcast_to(np.asarray(v, dtype=float), domain.shape).ravel()[st.interior]
    return float(np.abs(_gradient(st, x, b, r, 0.0)).max() / st.V)


def energy(u, v, domain: GridDomain, r: float, eps: float = 0.0) -> float:
    st = stencil(domain)
    x = np.asarray(u, dtype=float).ravel()[st.interior]
    b = np.broadcast_to(np.asarray(v, dtype=float), domain.shape).ravel()[st.interior]
    return _energy(st, x, b, r, eps)


def _laplace_solve(domain: GridDomain, b: np.ndarray) -> np.ndarray:
    lu = _LAPLACE_LU.get(domain.key)
    st = stencil(domain)
    if lu is None:
        K = (st.G.T @ sp.diags(np.tile(st.w, st.k)) @ st.G).tocsc()
        lu = spla.splu(K)
        _LAPLACE_LU[domain.key] = lu
    return lu.solve(st.V * b)


def _embed(domain: GridDomain, x: np.ndarray) -> GridFunction:
    st = stencil(domain)
    full = np.zeros(st.n_nodes)
    full[st.interior] = x
    return GridFunction(full.reshape(domain.shape), domain)


def solve(v, cfg: SolverConfig = SolverConfig(), initial=None, domain: GridDomain | None = None) -> GridFunction:
    """Solve ``-Delta_r u = v`` with ``u = 0`` on the boundary; ``r = cfg.r``."""
    return solve_with_info(v, cfg, initial=initial, domain=domain)[0]


def solve_with_info(v, cfg: SolverConfig = SolverConfig(), initial=None,
                    domain: GridDomain | None = None) -> tuple[GridFunction, SolveInfo]:
    if domain is None:
        domain = v.domain
    cfg.validate(domain.dim)
    st = stencil(domain)
    r = cfg.r
    b = np.broadcast_to(np.asarray(v, dtype=float), domain.shape).ravel()[st.interior].copy()
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side has non-finite values")
    if not b.any():
        return domain.zeros(), SolveInfo(0.0, 0)
    scale = float(np.abs(b).max())
    if cfg.normalize and r != 2.0 and scale != 1.0:
        # S_r(s b) = s^(1/(r-1)) S_r(b): the tolerance applies at max|b| = 1
        k = scale ** (1 / (r - 1))
        init = None if initial is None or k == 0 else np.asarray(initial, dtype=float) / k
        u, info = solve_with_info(domain.function(np.asarray(v, dtype=float) / scale), cfg, init, domain)
        info.residual *= scale
        return u.scaled(k), info

    x2 = _laplace_solve(domain, b)
    if r == 2.0:
        res = float(np.abs(_gradient(st, x2, b, 2.0, 0.0)).max())
        if res >= cfg.tol:
            # iterative refinement on the linear system
            x2 = x2 - _laplace_solve(domain, _gradient(st, x2, b, 2.0, 0.0) / st.V)
            res = float(np.abs(_gradient(st, x2, b, 2.0, 0.0)).max())
        if res >= cfg.tol:
            raise SolverError("linear solve did not reach tolerance", res, 1)
        return _embed(domain, x2), SolveInfo(res, 1)

    if initial is not None:
        x = np.asarray(initial, dtype=float).ravel()[st.interior].copy()
    else:
        # best multiple of the r = 2 solution along its ray
        _, s = _grads(st, x2)
        E = float(np.dot(st.w, s ** (r / 2)))
        L = float(st.V * np.dot(b, x2))
        x = x2 * (L / E) ** (1 / (r - 1)) if E > 0 and L > 0 else x2
    _, s0 = _grads(st, x)
    eps = cfg.eps0 if cfg.eps0 is not None else max(float(np.sqrt(s0.max())), 1e-300)
    eps = max(eps, cfg.eps_min)

    info = SolveInfo(float("inf"), 0)
    best = float("inf")
    floor = cfg.eps_min * 2.0 ** -_EXTRA_HALVINGS
    while True:
        done = False
        prev = float("inf")
        for k in range(cfg.stage_iter):
            res = float(np.abs(_gradient(st, x, b, r, 0.0)).max())
            best = min(best, res)
            if res < cfg.tol:
                done = True
                break
            grad = _gradient(st, x, b, r, eps)
            gnorm = float(np.abs(grad).max())
            if gnorm < max(cfg.tol, eps * st.V) and eps > cfg.eps_min:
                break
            if gnorm < 0.1 * cfg.tol or (k >= 5 and gnorm > 0.5 * prev):
                break  # regularised problem solved to roundoff or stagnating
            prev = min(prev, gnorm) if k >= 5 else gnorm
            if info.iterations >= cfg.max_iter:
                raise SolverError(f"p-Laplacian solve (r={r}) hit max_iter", best, info.iterations)
            d = _spd_solve(_hessian(st, x, r, eps), -grad, domain.dim)
            t = _line_search(st, x, d, b, r, eps, grad)
            if t is None:
                break
            x = x + t * d
            info.iterations += 1
        info.energies.append(_energy(st, x, b, r, eps))
        info.eps.append(eps)
        if done:
            break
        if eps <= floor:
            raise SolverError(f"p-Laplacian solve (r={r}) did not converge", best, info.iterations)
        # below eps_min keep halving only while the true residual is above tol
        eps = eps / 2 if eps <= cfg.eps_min else max(eps / 2, cfg.eps_min)
    info.residual = float(np.abs(_gradient(st, x, b, r, 0.0)).max())
    return _embed(domain, x), info


def rayleigh_quotient(u, domain: GridDomain, r: float) -> float:
    """``sum_e w_e |grad_e u|^r / (V sum_i |u_i|^r)``."""
    st = stencil(domain)
    x = np.asarray(u, dtype=float).ravel()[st.interior]
    _, s = _grads(st, x)
    return float(np.dot(st.w, s ** (r / 2)) / (st.V * np.sum(np.abs(x) ** r)))


def first_eigenvalue(r: float, domain: GridDomain, cfg: SolverConfig = SolverConfig()) -> EigenResult:
    """First Dirichlet eigenpair of ``-Delta_r`` by inverse power iteration.

    ``u_{k+1} = normalize(S_r(u_k^{r-1}))`` with the sup norm; the eigenvalue is
    the Rayleigh quotient of the iterate.  Stops when the quotient changes by
    less than ``cfg.eig_tol`` relative.
    """
    cfg = cfg.with_r(r)
    cfg.validate(domain.dim)
    u = solve(domain.constant(1.0), cfg.with_r(2.0))
    u = u.scaled(1 / sup_norm(u))
    lam = rayleigh_quotient(u, domain, r)
    change = float("inf")
    for k in range(1, cfg.eig_max_iter + 1):
        w = solve(np.abs(u.values) ** (r - 1), cfg, initial=u.scaled(lam ** (-1 / (r - 1))), domain=domain)
        u = w.scaled(1 / sup_norm(w))
        new = rayleigh_quotient(u, domain, r)
        change = abs(new - lam)
        lam = new
        if change <= cfg.eig_tol * lam:
            break
    else:
        raise SolverError(f"eigen iteration (r={r}) did not stagnate", change, cfg.eig_max_iter)
    eq_res = residual(u, lam * np.abs(u.values) ** (r - 1), domain, r)
    return EigenResult(lam, u, change, eq_res, k)
