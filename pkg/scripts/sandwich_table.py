"""Table of A_p <= lambda_1p <= B_1p on [0,1] with D = [1/4, 3/4].

    python scripts/sandwich_table.py --n 1025 --p 1.5 2 3 4
"""
import argparse
import time

from pqcone import cone_consts
from pqcone.grid import GridDomain


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[257, 1025, 4097])
    ap.add_argument("--p", type=float, nargs="+", default=[1.5, 2.0, 3.0, 4.0])
    args = ap.parse_args()
    print(f"{'p':>5} {'n':>6} {'A_p':>12} {'lambda_1p':>12} {'B_1p':>12} {'lower':>10} {'upper':>10} {'sec':>6}")
    for p in args.p:
        for n in args.n:
            t = time.perf_counter()
            c = cone_consts.compute_constants(GridDomain.interval(n), p, p)
            s = c.sandwich()["p"]
            print(f"{p:5g} {n:6d} {c.A_p:12.6f} {c.lambda_1p:12.6f} {c.B_1p:12.6f} "
                  f"{s['lower']:10.4g} {s['upper']:10.4g} {time.perf_counter() - t:6.2f}")


if __name__ == "__main__":
    main()
