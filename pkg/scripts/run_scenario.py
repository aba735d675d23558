"""Worked scenario: lambda_0 search and the solution set over a range of lambda.

    python scripts/run_scenario.py --n 513 --factors 1.1 2 4
"""
import argparse

from pqcone import certify, cone_consts, fixpoint, scenario
from pqcone.grid import GridDomain


def main():
    ap = argparse.ArgumentParser(description="lambda_0 and solutions of the worked scenario")
    ap.add_argument("--n", type=int, default=513)
    ap.add_argument("--factors", type=float, nargs="+", default=[0.5, 1.1, 2.0, 4.0])
    for k in "abcd":
        ap.add_argument(f"--{k}", type=float, default=1.0)
    args = ap.parse_args()
    P = scenario.ScenarioParams(a=args.a, b=args.b, c=args.c, d=args.d)
    dom = GridDomain.interval(args.n)
    consts = cone_consts.compute_constants(dom, 2, 2)
    A, B = scenario.constants_for(consts)
    lam0, _ = scenario.find_lambda0(P, A, B)
    print(f"A = {A:.10g}  B = {B:.10g}  lambda0 = {lam0:.10g}")
    for fac in args.factors:
        pt = scenario.evaluate(fac * lam0, P, A, B)
        bad = [k for k, m in pt.margins.items() if m <= 0]
        print(f"\nlambda = {fac:g} lambda0 = {pt.lam:.6g}: R1={pt.R1:.4g} R2={pt.R2:.4g} r1={pt.r1:.4g} "
              f"r2={pt.r2:g} rho=({pt.rho1}, {pt.rho2})  failing: {', '.join(bad) or 'none'}")
        if not pt.ok:
            continue
        spec = scenario.problem_at(pt, P, dom)
        cert = certify.certify_three_solutions(spec, consts)
        res = fixpoint.multiplicity_search(spec)
        print(f"  certificate {'PASS' if cert.verdict else 'FAIL'}; regions {res.regions}")
        for r in res:
            print(f"  |u|={r.sup_u:10.6g} |v|={r.sup_v:10.6g} ||u||={r.semi_u:10.6g} ||v||={r.semi_v:10.6g} "
                  f"{r.region:6s} residual {r.residual:.1e} via {r.seed}")


if __name__ == "__main__":
    main()
