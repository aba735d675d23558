import numpy as np
import pytest

from pqcone import fixpoint as fp
from pqcone import plap
from pqcone.certify import ProblemSpec, SpecError
from pqcone.grid import GridDomain, sup_norm


@pytest.fixture
def demo(line257):
    return ProblemSpec(line257, 2, 2, "16", "16", r1=0.5, r2=0.5, R1=2, R2=2)


def test_apply_N_constant_and_zero(demo, line257):
    d = line257
    Nu, Nv = fp.apply_N(d.zeros(), d.zeros(), demo)
    assert sup_norm(Nu) == pytest.approx(2.0, abs=1e-6)
    Zu, Zv = fp.apply_N(d.constant(3.0), d.constant(1.0), demo.with_(f="0", g="0"))
    assert sup_norm(Zu) == 0 and sup_norm(Zv) == 0


def test_apply_N_homogeneity_passthrough(line257):
    d = line257
    s = ProblemSpec(d, 3, 2, "1+u", "1")
    c = 1.7
    u = d.constant(0.5).values
    base = fp.apply_N(u, u, s)[0]
    scaled = fp.apply_N(u, u, s.with_(f=f"{c ** 2!r}*(1+u)"))[0]
    assert sup_norm(scaled.values - c * base.values) < 1e-8


def test_picard_constant_map(demo, line257):
    rec = fp.picard((line257.zeros().values,) * 2, demo)
    assert rec.converged and rec.iterations <= 2
    assert rec.sup_u == pytest.approx(2.0, abs=1e-3) and rec.semi_u == pytest.approx(1.5, abs=1e-3)
    assert all(c.verdict for c in fp.check_localization(rec, demo))


def test_picard_zero_map(demo, line257):
    rng = np.random.default_rng(1)
    rec = fp.picard((rng.random(257), rng.random(257)), demo.with_(f="0", g="0"))
    assert rec.converged and rec.zero_u and rec.zero_v and rec.region == "inner"


def test_monotone_directions_agree(line257):
    s = ProblemSpec(line257, 2, 2, "min(u,8)+8", "min(v,8)+8", r1=0.5, r2=0.5, R1=4, R2=4,
                    monotone={k: "increasing" for k in ("f.u", "f.v", "g.u", "g.v")})
    lo = fp.monotone_iterate("below", s)
    hi = fp.monotone_iterate("above", s)
    assert lo.converged and hi.converged
    assert sup_norm(lo.u.values - hi.u.values) < 1e-8
    rng = np.random.default_rng(2)
    for _ in range(5):
        r = fp.picard((4 * rng.random(257), 4 * rng.random(257)), s)
        assert sup_norm(r.u.values - lo.u.values) < 1e-8


def test_monotone_constant_one_step(demo):
    s = demo.with_(monotone={k: "increasing" for k in ("f.u", "f.v", "g.u", "g.v")})
    assert fp.monotone_iterate("below", s).iterations <= 1


def test_monotone_requires_declaration(demo):
    with pytest.raises(SpecError):
        fp.monotone_iterate("below", demo)


def test_monotone_detects_false_isotonicity(line257):
    s = ProblemSpec(line257, 2, 2, "20/(1+u)", "20/(1+v)", r1=0.1, r2=0.1, R1=4, R2=4,
                    monotone={k: "increasing" for k in ("f.u", "f.v", "g.u", "g.v")})
    with pytest.raises(fp.MonotonicityError):
        fp.monotone_iterate("below", s)


def test_search_zero_problem(demo):
    res = fp.multiplicity_search(demo.with_(f="0", g="0"))
    assert len(res) == 1 and res[0].region == "inner" and not res[0].nontrivial


def test_search_dedups(demo):
    res = fp.multiplicity_search(demo)
    assert len(res) == 1
    assert sum(1 for a in res.attempts if a.get("converged")) > 1


def test_localization_failures(demo, line257):
    zero = fp.make_record(line257.zeros().values, line257.zeros().values, demo.with_(f="0", g="0"),
                          plap.SolverConfig(), 0, "zero", 1e-9)
    checks = {c.id: c.verdict for c in fp.check_localization(zero, demo)}
    assert not checks["seminorm-u"]


def test_newton_reaches_repelling_solution():
    d = GridDomain.interval(129)
    s = ProblemSpec(d, 2, 2, "300*u^2/(4+u^3)", "0", r1=0.3, r2=0.1, R1=20, R2=1)
    picard_only = fp.multiplicity_search(s, use_newton=False)
    both = fp.multiplicity_search(s, use_newton=True)
    small = [r for r in both if r.nontrivial and r.semi_u < 0.3]
    assert len(both) > len(picard_only)
    assert small and small[0].residual < 1e-9


def test_region_labels(demo):
    s = demo.with_(rho1=0.1, rho2=0.1)
    assert fp.classify(0.05, 0.05, 0.01, 0.01, s) == "inner"
    assert fp.classify(0.3, 0.05, 0.2, 0.01, s) == "middle"
    assert fp.classify(2.0, 2.0, 1.0, 1.0, s) == "outer"
    # one seminorm above its radius and the other below: no region claims it
    assert fp.classify(2.0, 0.0, 1.0, 0.0, s, zero_v=True) == "outside"
