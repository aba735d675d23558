import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqcone import expr
from pqcone.expr import (ArityError, EvalDomainError, ExprSyntaxError, MissingBindingError,
                         UnknownIdentifierError, parse)


def test_worked_values():
    assert parse("u^2/(4+u^3)").eval(u=2) == pytest.approx(1 / 3)
    assert parse("u^2/(4+u^3)").eval(u=1) == pytest.approx(0.2)
    assert parse("atan(v)^2").eval(v=0) == 0
    assert parse("atan(v)^2").eval(v=1) == pytest.approx((math.pi / 4) ** 2)
    assert parse("u").eval(u=3.5) == 3.5


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as err:
        parse("1 + * 2")
    assert err.value.offset == 4


@pytest.mark.parametrize("src, exc", [
    ("w + 1", UnknownIdentifierError),
    ("sin(u, v)", ArityError),
    ("min(u)", ArityError),
    ("(u + 1", ExprSyntaxError),
    ("", ExprSyntaxError),
])
def test_rejections(src, exc):
    with pytest.raises(exc):
        parse(src)


def test_missing_binding_and_domain_errors():
    with pytest.raises(MissingBindingError):
        parse("u + v").eval(u=1)
    with pytest.raises(EvalDomainError):
        parse("sqrt(u)").eval(u=-1)
    with pytest.raises(EvalDomainError):
        parse("1/u").eval(u=0)


def test_precedence_and_associativity():
    assert parse("2^3^2").eval() == 512
    assert parse("-2^2").eval() == -4
    assert parse("8/4/2").eval() == 1
    assert parse("2-3-4").eval() == -5
    assert parse("2*3+4*5").eval() == 26


def test_vectorised_and_dependencies():
    e = parse("x*u + min(v, 2)")
    out = e.eval(x=np.array([0.0, 1.0]), u=np.array([3.0, 4.0]), v=5.0)
    assert np.allclose(out, [2.0, 6.0])
    assert e.depends_on("u") and not e.depends_on("y")


def _random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(["u", "v", "x", "y", str(rng.randint(1, 9)), f"{rng.uniform(0.5, 3):.3f}"])
    op = rng.choice(["+", "-", "*", "/", "^", "neg", "call"])
    a = _random_tree(rng, depth - 1)
    if op == "neg":
        return f"-({a})"
    if op == "call":
        return f"{rng.choice(['atan', 'exp', 'sin', 'cos'])}({a})"
    b = _random_tree(rng, depth - 1)
    if op == "^":
        return f"({a})^{rng.randint(1, 3)}"
    return f"({a}){op}({b})"


def _python_eval(src, env):
    py = src.replace("^", "**")
    ns = {"atan": math.atan, "exp": math.exp, "sin": math.sin, "cos": math.cos, **env}
    return eval(py, {"__builtins__": {}}, ns)


def test_randomised_cases_match_python():
    rng = random.Random(20240601)
    env = {"u": 0.7, "v": 1.3, "x": 0.25, "y": 0.5}
    checked = 0
    while checked < 100:
        src = _random_tree(rng, 4)
        try:
            want = _python_eval(src, env)
        except (ZeroDivisionError, OverflowError):
            continue
        if not math.isfinite(want) or abs(want) > 1e12:
            continue
        e = parse(src)
        assert e.eval(env) == pytest.approx(want, rel=1e-12, abs=1e-12), src
        again = parse(e.render())
        assert again.render() == e.render()
        assert again.eval(env) == pytest.approx(want, rel=1e-12, abs=1e-12)
        checked += 1


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50))
def test_left_associative_subtraction(a, b, c):
    e = parse(f"({a!r}) - ({b!r}) - ({c!r})")
    assert e.eval() == pytest.approx((a - b) - c, abs=1e-9)


def test_bound_properties_on_logspace():
    xs = np.geomspace(1e-6, 1e6, 4001)
    phi = parse("u^2/(4+u^3)").eval(u=xs)
    psi = parse("atan(v)^2").eval(v=xs)
    assert phi.max() <= 1 / 3 + 1e-15
    assert psi.max() <= math.pi ** 2 / 4
    assert expr.constant(2.5).eval() == 2.5
