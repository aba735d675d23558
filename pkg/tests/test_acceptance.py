"""Acceptance criteria 1-10, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the summary) or
``python tests/test_acceptance.py``.
"""
import json
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from pqcone import abstract_lab as lab
from pqcone import certify, cli, cone_consts, expr, fixpoint, plap, scenario
from pqcone.certify import ProblemSpec
from pqcone.grid import GridDomain, sup_norm

SPECS = Path(__file__).resolve().parent.parent / "specs"
RESULTS: dict[int, str] = {}


def report(n, ok, detail, elapsed):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  ({elapsed:.2f} s)"
    RESULTS[n] = line
    print(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t


# 1 ---------------------------------------------------------------------------

def test_c01_torsion_oracle():
    d = GridDomain.interval(1025)
    with Timer() as t2:
        m2 = sup_norm(plap.solve(d.constant(1.0), plap.SolverConfig(r=2.0)))
    with Timer() as t3:
        m3 = sup_norm(plap.solve(d.constant(1.0), plap.SolverConfig(r=3.0)))
    exact3 = (2 / 3) * 0.5 ** 1.5
    ok = abs(m2 - 0.125) < 1e-5 and abs(m3 - exact3) < 1e-3 and t2.elapsed < 1 and t3.elapsed < 1
    report(1, ok, f"|S_2(1)|={m2:.8f} err {abs(m2 - 0.125):.1e}; |S_3(1)|={m3:.6f} err {abs(m3 - exact3):.1e}",
           max(t2.elapsed, t3.elapsed))


# 2 ---------------------------------------------------------------------------

def test_c02_eigenvalue_oracle():
    with Timer() as t:
        e1 = plap.first_eigenvalue(2.0, GridDomain.interval(1025)).eigenvalue
        e2 = plap.first_eigenvalue(2.0, GridDomain.rectangle(129)).eigenvalue
    ok = abs(e1 - math.pi ** 2) < 1e-3 and abs(e2 - 2 * math.pi ** 2) < 1e-2 and t.elapsed < 10
    report(2, ok, f"1D {e1:.6f} (err {abs(e1 - math.pi ** 2):.1e}); 2D {e2:.5f} "
                  f"(err {abs(e2 - 2 * math.pi ** 2):.1e})", t.elapsed)


# 3 ---------------------------------------------------------------------------

def test_c03_sandwich():
    rows, ok = [], True
    with Timer() as t:
        for p in (1.5, 2.0, 3.0, 4.0):
            # the Harnack constant converges at O(h); p = 2 is compared with its closed forms
            n = 4097 if p == 2 else 1025
            c = cone_consts.compute_constants(GridDomain.interval(n), p, p)
            s = c.sandwich()["p"]
            ok &= s["lower"] >= 0 and s["upper"] >= 0
            rows.append(f"p={p:g}: {c.A_p:.4f} <= {c.lambda_1p:.4f} <= {c.B_1p:.4f} "
                        f"(margins {s['lower']:.3g}, {s['upper']:.3g})")
            if p == 2:
                err = abs(c.A_p - 8) + abs(c.lambda_1p - math.pi ** 2) + abs(c.B_1p - 16)
                ok &= err < 1e-2
                rows.append(f"p=2 combined error {err:.2e}")
    ok &= t.elapsed < 30
    report(3, ok, "; ".join(rows), t.elapsed)


# 4 ---------------------------------------------------------------------------

def test_c04_operator_properties():
    d = GridDomain.interval(257)
    rng = np.random.default_rng(4)
    tol = plap.SolverConfig().tol
    worst = {}
    with Timer() as t:
        # normalize=False exercises the Newton iteration itself, not the exact rescaling
        for normalize in (True, False):
            tag = "" if normalize else " (raw)"
            h = iso = 0.0
            for r in (1.5, 2.0, 3.0, 4.0):
                cfg = plap.SolverConfig(r=r, normalize=normalize)
                for _ in range(3):
                    v = rng.random(257)
                    c = rng.uniform(0.1, 10)
                    u, uc = plap.solve(d.function(v), cfg), plap.solve(d.function(c * v), cfg)
                    k = c ** (1 / (r - 1))
                    h = max(h, sup_norm(uc.values - k * u.values) / max(1.0, sup_norm(uc)) / tol)
            for j in range(50):
                cfg = plap.SolverConfig(r=(1.5, 2.0, 3.0, 4.0)[j % 4], normalize=normalize)
                a = rng.random(257) * rng.uniform(0.1, 5)
                b = a + rng.random(257) * rng.uniform(0, 2)
                ua, ub = plap.solve(d.function(a), cfg), plap.solve(d.function(b), cfg)
                iso = max(iso, max(0.0, -(ub.values - ua.values).min()) / max(1.0, sup_norm(ub)) / tol)
            worst["homogeneity" + tag] = h
            worst["isotonicity" + tag] = iso
        cfg = plap.SolverConfig(r=2.0)
        lin = 0.0
        for _ in range(5):
            a, b = rng.random(257), rng.random(257)
            s, w = rng.uniform(-3, 3, 2)
            lhs = plap.solve(d.function(s * a + w * b), cfg).values
            rhs = s * plap.solve(d.function(a), cfg).values + w * plap.solve(d.function(b), cfg).values
            lin = max(lin, sup_norm(lhs - rhs) / tol)
        worst["linearity"] = lin
    ok = all(x <= 10 for x in worst.values()) and t.elapsed < 60
    report(4, ok, ", ".join(f"{k} {v:.2g} x tol" for k, v in worst.items()), t.elapsed)


# 5 ---------------------------------------------------------------------------

def test_c05_certificate_round_trip(tmp_path):
    spec_file = SPECS / "demo16.toml"
    with Timer() as t:
        cfg = cli.load_spec(spec_file)
        consts = cone_consts.compute_constants(cfg.spec.domain, 2, 2)
        cert = certify.certify_existence(cfg.spec, consts)
        code = cli.main(["solve", "--spec", str(spec_file), "--out", str(tmp_path)])
    sols = [json.loads(p.read_text()) for p in sorted(tmp_path.glob("solution_*.json"))]
    s = sols[0] if sols else {}
    ok = (cert.verdict and code == 0 and len(sols) == 1 and abs(s["sup_u"] - 2) <= 1e-3
          and abs(s["seminorm_u"] - 1.5) <= 1e-3 and s["localization_verdict"] == "PASS" and t.elapsed < 5)
    report(5, ok, f"certificate {'PASS' if cert.verdict else 'FAIL'}, |u|={s.get('sup_u', float('nan')):.6f}, "
                  f"||u||={s.get('seminorm_u', float('nan')):.6f}, localization {s.get('localization_verdict')}",
           t.elapsed)


# 6 ---------------------------------------------------------------------------

def test_c06_scenario(tmp_path):
    with Timer() as t:
        code = cli.main(["example", "--n", "513", "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "example.json").read_text())
    run = next(r for r in rep["runs"] if r["tag"] == "lam2")
    r1, r2 = run["point"]["r1"], run["point"]["r2"]
    sols = run["nontrivial_solutions"]
    good = [s for s in sols if s["residual"] < 1e-8 and not (s["zero_u"] or s["zero_v"])
            and s["min_interior_u"] > 0 and s["min_interior_v"] > 0]
    outer = [s for s in good if s["seminorm_u"] > r1 and s["seminorm_v"] > r2]
    ok = (code == 0 and math.isfinite(rep["lambda0"]) and run["certificate"] == "PASS"
          and len(good) >= 2 and bool(outer) and t.elapsed < 300)
    report(6, ok, f"lambda0={rep['lambda0']:.6g}; at 2*lambda0 certificate {run['certificate']}, "
                  f"{len(sols)} nontrivial, {len(good)} with both components positive and residual < 1e-8, "
                  f"{len(outer)} beyond (r1, r2)", t.elapsed)


# 7 ---------------------------------------------------------------------------

def test_c07_lab_soundness():
    fx = lab.fixtures()
    names = {f.name for f in fx}
    checked, problems = 0, []
    with Timer() as t:
        for f in fx:
            for thm in lab.THEOREMS:
                try:
                    if thm == "ladder":
                        hyps = lab._ladder_hypotheses(f.op, f.radii, 9)
                    else:
                        hyps = lab.check_conditions(f.op, f.radii, lab.THEOREMS[thm], 9)
                except lab.LabError:
                    continue
                if not all(h.verdict for h in hyps):
                    continue
                checked += 1
                v = lab.validate_theorem(thm, f.op, f.radii)
                if not v.confirmed:
                    problems.append(f"{f.name}/{thm}")
            if f.expected_points:
                bounds = f.radii.rungs[-1][2:] if f.radii.rungs else (f.radii.R1, f.radii.R2)
                pts = [np.concatenate([p.u.array, p.v.array]) for p in lab.brute_force_fixed_points(f.op, bounds)]
                if len(pts) != len(f.expected_points):
                    problems.append(f"{f.name}: {len(pts)} points, expected {len(f.expected_points)}")
        three = lab.validate_theorem("three", *(lambda f: (f.op, f.radii))(next(f for f in fx if f.name == "three")))
        regions_ok = three.confirmed and len(set(three.slots.values())) == 3
        gold = ((1 + 5 ** 0.5) / 2) ** 2
        sq = next(f for f in fx if f.name == "sqrt")
        g = lab.brute_force_fixed_points(sq.op, (9, 9))
        gerr = abs(g[0].u.values[0] - gold) if len(g) == 1 else math.inf
    ok = (len(fx) >= 6 and {"constant", "zero", "sqrt", "three"} <= names and not problems and regions_ok
          and gerr < 1e-10 and t.elapsed < 60)
    report(7, ok, f"{len(fx)} fixtures, {checked} passing hypothesis sets all CONFIRMED"
                  f"{' except ' + ', '.join(problems) if problems else ''}; three-solution regions "
                  f"{'distinct' if regions_ok else 'NOT distinct'}; golden-ratio error {gerr:.1e}", t.elapsed)


# 8 ---------------------------------------------------------------------------

def test_c08_nonexistence():
    d = GridDomain.interval(257)
    with Timer() as t:
        consts = cone_consts.compute_constants(d, 2, 2)
        s2 = ProblemSpec(d, 2, 2, "0", "20*v")
        cert = certify.certify_nonexistence(s2, consts, ((0, 10), (0, 10)))
        g_ok = cert.record("g-above-eigen").verdict
        s1 = ProblemSpec(d, 2, 2, "0.5*9.8696*u", "0.5*9.8696*v")
        f_ok = certify.certify_nonexistence(s1, consts, ((0, 10), (0, 10))).record("f-below-eigen").verdict
        rng = np.random.default_rng(8)
        worst = 0.0
        for j in range(20):
            amp = 10 * rng.random()
            rec = fixpoint.picard((amp * rng.random(257), amp * rng.random(257)), s1, label=f"random-{j}")
            worst = max(worst, rec.sup_u) if rec.converged else math.inf
    ok = g_ok and f_ok and worst < 1e-6 and t.elapsed < 60
    report(8, ok, f"g=20v above-eigen {'PASS' if g_ok else 'FAIL'} (20 > {consts.lambda_1q:.4f}); "
                  f"f below-eigen {'PASS' if f_ok else 'FAIL'}; worst |u| after Picard from 20 seeds {worst:.1e}",
           t.elapsed)


# 9 ---------------------------------------------------------------------------

def _square_torsion_center():
    # sinh(k pi/2) / sinh(k pi) = 1 / (2 cosh(k pi/2))
    s = sum(math.sin(k * math.pi / 2) / (k ** 3 * math.cosh(k * math.pi / 2)) for k in range(1, 200, 2))
    return 1 / 8 - 4 / math.pi ** 3 * s


def test_c09_grid_convergence():
    exact = _square_torsion_center()
    errs = []
    with Timer() as t:
        for n in (65, 129, 257, 513):
            u = plap.solve(GridDomain.rectangle(n).constant(1.0), plap.SolverConfig())
            errs.append(abs(sup_norm(u) - exact))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    ok = min(orders) >= 1.9
    report(9, ok, "unit-square torsion max errors " + ", ".join(f"{e:.2e}" for e in errs)
                  + "; orders " + ", ".join(f"{o:.3f}" for o in orders), t.elapsed)


# 10 --------------------------------------------------------------------------

def _tree(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(["u", "v", "x", "y", str(rng.randint(1, 9))])
    op = rng.choice("+-*/^")
    a, b = _tree(rng, depth - 1), _tree(rng, depth - 1)
    if op == "^":
        return f"{a}^{rng.randint(1, 3)}" if len(a) == 1 else f"({a})^{rng.randint(1, 3)}"
    return f"{a} {op} {b}"


def test_c10_parser():
    rng = random.Random(10)
    env = {"u": 1.25, "v": 0.75, "x": 0.5, "y": 2.0}
    passed = total = 0
    with Timer() as t:
        while total < 100:
            src = _tree(rng, 4)
            try:
                want = eval(src.replace("^", "**"), {"__builtins__": {}}, dict(env))
            except ZeroDivisionError:
                continue
            total += 1
            e = expr.parse(src)
            again = expr.parse(e.render())
            if (math.isclose(e.eval(env), want, rel_tol=1e-12, abs_tol=1e-12)
                    and again.render() == e.render() and again.eval(env) == e.eval(env)):
                passed += 1
        xs = np.geomspace(1e-8, 1e8, 100001)
        phi = expr.parse("u^2/(4+u^3)").eval(u=xs).max()
        psi = expr.parse("atan(v)^2").eval(v=xs).max()
    ok = passed == total == 100 and phi <= 1 / 3 and psi <= math.pi ** 2 / 4
    report(10, ok, f"{passed}/{total} precedence and round-trip cases; max Phi {phi:.12f} <= 1/3; "
                   f"max Psi {psi:.10f} <= pi^2/4", t.elapsed)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
