"""Observed order of the p = 2 torsion maximum under grid refinement.

On the interval the three-point difference solution is exact at the nodes,
so the informative case is the unit square, compared against the Fourier
series value at the centre.
"""
import argparse
import math

from pqcone import plap
from pqcone.grid import GridDomain, sup_norm


def square_center(terms=200):
    # sinh(k pi/2) / sinh(k pi) = 1 / (2 cosh(k pi/2))
    s = sum(math.sin(k * math.pi / 2) / (k ** 3 * math.cosh(k * math.pi / 2)) for k in range(1, 2 * terms, 2))
    return 1 / 8 - 4 / math.pi ** 3 * s


def main():
    ap = argparse.ArgumentParser(description="torsion grid convergence")
    ap.add_argument("--n", type=int, nargs="+", default=[65, 129, 257, 513])
    args = ap.parse_args()
    exact = square_center()
    print(f"exact centre value {exact:.15f}")
    prev = None
    for n in args.n:
        line = abs(sup_norm(plap.solve(GridDomain.interval(n).constant(1.0))) - 0.125)
        err = abs(sup_norm(plap.solve(GridDomain.rectangle(n).constant(1.0))) - exact)
        order = "" if prev is None else f"{math.log2(prev / err):.4f}"
        print(f"n={n:5d}  interval error {line:.2e}  square error {err:.4e}  order {order}")
        prev = err


if __name__ == "__main__":
    main()
