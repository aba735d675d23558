import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqcone import certify
from pqcone.certify import ProblemSpec, SpecError, box_extremum, compare


@pytest.fixture
def demo(line257):
    return ProblemSpec(line257, 2, 2, "16", "16", r1=0.5, r2=0.5, R1=2, R2=2)


def test_box_extremum_values(demo):
    s = demo.with_(monotone={"f.u": "increasing"})
    assert box_extremum("u^2/(4+u^3)", "closure", (0, 2), (0, 1), "max", s, "f") == pytest.approx(1 / 3)
    for mode in ("min", "max"):
        assert box_extremum("2.5", 1, (0, 7), (3, 4), mode, demo) == 2.5
    s = demo.with_(monotone={"f.u": "increasing", "f.v": "increasing"})
    assert box_extremum("u + v", "closure", (0, 1), (0, 1), "max", s, "f") == 2


def test_box_extremum_sampled_finds_interior_peak(demo):
    # no monotonicity declared: the peak at u=2 must be found by sampling
    val = box_extremum("u^2/(4+u^3)", "closure", (0, 4), (0, 1), "max", demo.with_(resolution=65))
    assert val == pytest.approx(1 / 3, rel=1e-3)


def test_existence_demo_passes(demo, consts257):
    rep = certify.certify_existence(demo, consts257)
    assert rep.verdict
    assert rep.record("upper.f").lhs == 8.0
    assert rep.record("lower.f").margin > 0
    json.loads(certify.report_json(rep))


def test_existence_zero_fails_on_lower(demo, consts257):
    rep = certify.certify_existence(demo.with_(f="0"), consts257)
    assert not rep.verdict
    assert "lower.f" in rep.failed()
    assert rep.record("lower.f").margin < 0


def test_existence_rejects_bad_radii(demo, consts257):
    with pytest.raises(SpecError):
        certify.certify_existence(demo.with_(r1=3.0), consts257)


def test_existence_or(demo, consts257):
    rep = certify.certify_existence_or(demo.with_(g="0"), consts257)
    assert rep.verdict and rep.details["disjuncts_fired"] == ["lower-or.f"]
    assert not certify.certify_existence_or(demo.with_(f="0", g="0"), consts257).verdict
    both = certify.certify_existence_or(demo, consts257)
    assert both.details["disjuncts_fired"] == ["lower-or.f", "lower-or.g"]


def test_three_rejections_and_zero(demo, consts257):
    with pytest.raises(SpecError):
        certify.certify_three_solutions(demo.with_(rho1=0.6, rho2=0.1), consts257)
    rep = certify.certify_three_solutions(demo.with_(rho1=0.1, rho2=0.1, f="0", g="0"), consts257)
    assert not rep.verdict and "lower.f" in rep.failed()


STEP = "12 + 44*{0}^20/({0}^20 + 2.5^20)"


def test_ladder(demo, consts257):
    s = demo.with_(f=STEP.format("u"), g=STEP.format("v"),
                   monotone={"f.u": "increasing", "g.v": "increasing"})
    rep = certify.certify_n_solutions(s, [((0.5, 0.5), (2, 2)), ((3, 3), (8, 8))], consts257)
    assert rep.verdict
    assert rep.details["guaranteed"] == 2 and rep.details["additional"] == 1 and rep.details["total"] == 3
    single = certify.certify_n_solutions(demo, [((0.5, 0.5), (2, 2))], consts257)
    base = certify.certify_existence(demo, consts257)
    assert single.verdict == base.verdict
    assert [c.margin for c in single.conditions] == [c.margin for c in base.conditions]
    with pytest.raises(SpecError):
        certify.certify_n_solutions(s, [((0.5, 0.5), (3, 3)), ((3, 3), (8, 8))], consts257)


def test_nonexistence_eigen_linear(line257, consts257):
    lam1 = consts257.lambda_1p
    spec = ProblemSpec(line257, 2, 2, f"0.5*{lam1!r}*u", "20*v")
    rep = certify.certify_nonexistence(spec, consts257, ((0, 10), (0, 10)))
    assert rep.record("f-below-eigen").verdict
    assert rep.record("g-above-eigen").verdict
    assert rep.details["no_nontrivial"] == "PASS"


def test_nonexistence_constant_violated_near_zero(line257, consts257):
    spec = ProblemSpec(line257, 2, 2, "1", "0")
    rec = certify.certify_nonexistence(spec, consts257, ((0, 10), (0, 10))).record("f-below-eigen")
    assert not rec.verdict
    assert rec.witness["u"] < 0.1


@settings(max_examples=100)
@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.sampled_from(["<=", "<", ">", ">="]))
def test_margin_sign_matches_verdict(a, b, sense):
    rec = compare("c", "", a, sense, b, 1e-9)
    if sense in ("<", ">"):
        assert rec.verdict == (rec.margin > 0)
    else:
        assert rec.verdict == (rec.margin >= 0)
    if rec.verdict and a != b:
        strictly = {"<=": a < b, "<": a < b, ">": a > b, ">=": a > b}[sense]
        close = abs(a - b) <= 1e-9 * max(abs(a), abs(b))
        assert strictly or close


def test_delta_band_is_relative():
    assert compare("c", "", 8.0, "<=", 8.0 * (1 - 1e-12), 1e-9).verdict
    assert not compare("c", "", 8.0, "<", 8.0, 1e-9).verdict
    assert not compare("c", "", 1.0, "<=", 0.99, 1e-9).verdict


def test_spec_validation(line257):
    with pytest.raises(SpecError):
        ProblemSpec(line257, 2, 2, "16", "16", monotone={"h.u": "increasing"})
    with pytest.raises(SpecError):
        ProblemSpec(line257, 2, 2, "16", "16", monotone={"f.u": "up"})
