import math

import numpy as np
import pytest

from pqcone import abstract_lab as lab
from pqcone.abstract_lab import LabOperator, Radii

GOLD2 = ((1 + math.sqrt(5)) / 2) ** 2
FIXTURES = {fx.name: fx for fx in lab.fixtures()}


def entry(entries, cid):
    return next(e for e in entries if e.id == cid)


def test_constant_map_conditions():
    op = LabOperator.from_exprs(["2"], ["3"])
    got = lab.check_conditions(op, Radii(r1=1, r2=1, R1=2, R2=3), ("invariance", "boundary-V"))
    assert all(e.verdict for e in got)
    got = lab.check_conditions(op, Radii(r1=2.5, r2=1, R1=3, R2=3), ("boundary-V",))
    assert not got[0].verdict


def test_zero_map_fails_lower():
    op = LabOperator.from_exprs(["0"], ["0"])
    assert not lab.check_conditions(op, Radii(r1=1, r2=1, R1=2, R2=2), ("boundary-V",))[0].verdict


def test_sqrt_map_conditions():
    op = FIXTURES["sqrt"].op
    got = lab.check_conditions(op, FIXTURES["sqrt"].radii, ("boundary-U", "invariance"))
    assert all(e.verdict for e in got)


def test_unknown_condition_and_missing_radii():
    op = FIXTURES["sqrt"].op
    with pytest.raises(lab.LabError):
        lab.check_conditions(op, Radii(r1=1, r2=1, R1=9, R2=9), ("nope",))
    with pytest.raises(lab.LabError):
        lab.check_conditions(op, Radii(r1=1, r2=1, R1=9, R2=9), ("no-eigen-rho",))


def test_brute_force_constant_and_golden():
    pts = lab.brute_force_fixed_points(LabOperator.from_exprs(["2"], ["3"]), (4, 4))
    assert [(p.u.values, p.v.values) for p in pts] == [((2.0,), (3.0,))]
    pts = lab.brute_force_fixed_points(FIXTURES["sqrt"].op, (9, 9))
    assert len(pts) == 1
    assert abs(pts[0].u.values[0] - GOLD2) < 1e-10 and abs(pts[0].v.values[0] - GOLD2) < 1e-10


def test_swap_diagonal():
    k = 11
    pts = lab.brute_force_fixed_points(lab.swap_operator(), (1, 1), grid_resolution=k)
    assert len(pts) == k
    assert all(abs(p.u.values[0] - p.v.values[0]) < 1e-12 for p in pts)


def test_validate_sqrt():
    v = lab.validate_theorem("one-solution", FIXTURES["sqrt"].op, FIXTURES["sqrt"].radii)
    assert v.confirmed
    p = v.fixed_points[v.slots["outside-U"]]
    assert p.u.semi >= 1


def test_validate_three_regions():
    fx = FIXTURES["three"]
    v = lab.validate_theorem("three", fx.op, fx.radii)
    assert v.confirmed
    assert len(v.fixed_points) == 9
    where = {k: (v.fixed_points[i].u.values[0], v.fixed_points[i].v.values[0]) for k, i in v.slots.items()}
    assert where["inner"] == (0.0, 0.0)
    assert min(where["outer"]) > 2


def test_failed_hypothesis_refuses():
    fx = FIXTURES["zero"]
    with pytest.raises(lab.HypothesisError) as err:
        lab.validate_theorem("one-solution", fx.op, fx.radii)
    assert any(e.id == "boundary-U" for e in err.value.failed)


def test_ladder_fixture():
    fx = FIXTURES["ladder"]
    v = lab.validate_theorem("ladder", fx.op, fx.radii)
    assert v.confirmed and set(v.slots) == {"rung1", "rung2", "between1"}


def test_isotone_point_checks():
    radii = Radii(r1=1, r2=1, R1=9, R2=9)
    assert all(e.verdict for e in lab.check_conditions(FIXTURES["sqrt"].op, radii, ("iso-U", "iso-V")))
    weak = LabOperator.from_exprs(["u/4"], ["v/4"], isotone=True)
    assert not lab.check_conditions(weak, radii, ("iso-V",))[0].verdict


def test_operator_validation():
    with pytest.raises(lab.LabError):
        LabOperator.from_exprs(["u"] * 4, ["v"] * 3)
    with pytest.raises(lab.LabError):
        LabOperator.from_exprs(["u"], ["v"], mask1=[False])
    with pytest.raises(lab.LabError):
        lab.ConeVector((1.0, -1.0), (True, True))


def test_expected_points_found():
    for fx in FIXTURES.values():
        if not fx.expected_points:
            continue
        bounds = (fx.radii.R1, fx.radii.R2)
        pts = lab.brute_force_fixed_points(fx.op, bounds)
        arr = [np.concatenate([p.u.array, p.v.array]) for p in pts]
        for u, v in fx.expected_points:
            want = np.array(u + v)
            assert any(np.abs(a - want).max() < 1e-9 for a in arr), (fx.name, want)
