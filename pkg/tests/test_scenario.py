import math

import numpy as np
import pytest

from pqcone import scenario as sc
from pqcone.certify import SpecError


def test_bounds_of_phi_psi():
    xs = np.geomspace(1e-8, 1e8, 20001)
    assert max(sc.Phi(x) for x in xs) <= sc.L1
    assert sc.Phi(2.0) == pytest.approx(1 / 3)
    assert max(sc.Psi(x) for x in xs) <= sc.L2


def test_params_validation():
    with pytest.raises(SpecError):
        sc.ScenarioParams(a=2, b=1)
    with pytest.raises(SpecError):
        sc.ScenarioParams(c=0)


def test_lambda0_threshold(consts257):
    A, B = sc.constants_for(consts257)
    P = sc.ScenarioParams()
    lam0, trace = sc.find_lambda0(P, A, B)
    assert math.isfinite(lam0) and trace[-1].ok
    assert sc.evaluate(lam0, P, A, B).ok
    half = sc.evaluate(lam0 / 2, P, A, B)
    assert not half.ok
    assert min(half.margins[k] for k in ("exa3-u", "exa3-v", "exa3-limit", "exa2-u", "exa2-v")
               if k in half.margins) < 0
    pt = sc.evaluate(2 * lam0, P, A, B)
    assert pt.rho1 < pt.r1 and pt.rho2 < pt.r2 and pt.r1 == pytest.approx(1 / math.sqrt(pt.R1))


def test_bracket_exhaustion(consts257):
    A, B = sc.constants_for(consts257)
    with pytest.raises(sc.BracketError) as err:
        sc.find_lambda0(sc.ScenarioParams(lam_hi=16), A, B)
    assert len(err.value.trace) == 5


def test_custom_phi_checked(line257):
    sc.check_bounds(sc.ScenarioParams(a=1, b=2, phi="1+x"), line257)
    with pytest.raises(SpecError):
        sc.check_bounds(sc.ScenarioParams(a=1, b=1.5, phi="1+x"), line257)
