import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqcone import plap
from pqcone.grid import GridDomain, sup_norm

TOL = plap.SolverConfig().tol


def torsion_max(r):
    return 0.5 ** (r / (r - 1)) * (r - 1) / r


def test_torsion_p2(line1025):
    u = plap.solve(line1025.constant(1.0), plap.SolverConfig(r=2.0))
    assert abs(sup_norm(u) - 0.125) < 1e-5


@pytest.mark.parametrize("r, tol", [(3.0, 1e-3), (1.5, 1e-3), (4.0, 1e-3)])
def test_torsion_closed_form(line1025, r, tol):
    u = plap.solve(line1025.constant(1.0), plap.SolverConfig(r=r))
    assert abs(sup_norm(u) - torsion_max(r)) < tol


def test_zero_data_gives_zero(line257):
    for r in (1.5, 2.0, 3.0):
        u = plap.solve(line257.zeros(), plap.SolverConfig(r=r))
        assert sup_norm(u) == 0


def test_residual_small_and_boundary_zero(line257):
    rng = np.random.default_rng(0)
    v = line257.function(rng.random(257))
    for r in (1.5, 3.0):
        u, info = plap.solve_with_info(v, plap.SolverConfig(r=r))
        assert info.residual < 1e-9
        assert u.values[0] == 0 and u.values[-1] == 0
        # strong form: the weak residual divided by the node volume
        strong = plap.residual(u, v, line257, r)
        assert strong == pytest.approx(info.residual / line257.node_volume, rel=0.05)  # both near roundoff


def test_exponent_precondition():
    d = GridDomain.interval(33)
    with pytest.raises(ValueError):
        plap.solve(d.constant(1.0), plap.SolverConfig(r=1.0))
    sq = GridDomain.rectangle(9)
    with pytest.raises(ValueError):
        plap.solve(sq.constant(1.0), plap.SolverConfig(r=4 / 3))


def test_eigenvalue_interval(line1025):
    res = plap.first_eigenvalue(2.0, line1025)
    assert abs(res.eigenvalue - math.pi ** 2) < 1e-3
    rq = plap.rayleigh_quotient(res.eigenfunction, line1025, 2.0)
    assert rq == pytest.approx(res.eigenvalue, rel=1e-9)


def test_eigenvalue_p3_rayleigh_consistent(line257):
    res = plap.first_eigenvalue(3.0, line257)
    rq = plap.rayleigh_quotient(res.eigenfunction, line257, 3.0)
    assert abs(rq - res.eigenvalue) <= 10 * res.residual + 1e-9 * res.eigenvalue


@pytest.mark.slow
def test_eigenvalue_square():
    d = GridDomain.rectangle(129)
    res = plap.first_eigenvalue(2.0, d)
    assert abs(res.eigenvalue - 2 * math.pi ** 2) < 1e-2


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([1.5, 2.0, 3.0]), st.floats(0.1, 20.0), st.integers(0, 10**6))
def test_homogeneity(r, c, seed):
    d = GridDomain.interval(129)
    v = d.function(np.random.default_rng(seed).random(129))
    cfg = plap.SolverConfig(r=r)
    u = plap.solve(v, cfg)
    uc = plap.solve(v.scaled(c), cfg)
    scale = c ** (1 / (r - 1))
    assert sup_norm(uc.values - scale * u.values) <= 10 * TOL * max(1.0, scale * sup_norm(u))


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([1.5, 2.0, 3.0]), st.integers(0, 10**6))
def test_isotone(r, seed):
    d = GridDomain.interval(129)
    rng = np.random.default_rng(seed)
    a = rng.random(129)
    b = a + rng.random(129)
    cfg = plap.SolverConfig(r=r)
    ua, ub = plap.solve(d.function(a), cfg), plap.solve(d.function(b), cfg)
    assert (ub.values - ua.values).min() >= -10 * TOL * max(1.0, sup_norm(ub))


def test_linear_at_p2(line257):
    rng = np.random.default_rng(5)
    a, b = rng.random(257), rng.random(257)
    cfg = plap.SolverConfig(r=2.0)
    ua, ub = plap.solve(line257.function(a), cfg), plap.solve(line257.function(b), cfg)
    uab = plap.solve(line257.function(2 * a + 3 * b), cfg)
    assert sup_norm(uab.values - 2 * ua.values - 3 * ub.values) <= 10 * TOL
