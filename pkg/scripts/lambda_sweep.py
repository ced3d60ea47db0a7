"""Sweep lambda across (0, lambda1) and beyond, printing branch energies.

Past lambda1 the minus branch eventually loses its Nehari root; those rows
show up as unconverged with NaN energy.
"""
import argparse
import csv
import sys
import warnings

import numpy as np

from nehari import Grid, Params, compute_thresholds, lambda_sweep
from nehari.config import resolve_weight
from nehari.energy import Weights


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=201)
    parser.add_argument("--weight-a", default="const:1")
    parser.add_argument("--q", type=float, default=1.5)
    parser.add_argument("--max-fraction", type=float, default=3.0)
    parser.add_argument("--points", type=int, default=16)
    args = parser.parse_args()

    grid = Grid(1, args.n)
    weights = Weights(resolve_weight(args.weight_a, grid), np.ones(grid.node_count))
    th = compute_thresholds(grid, weights, args.q, 2.0, 2.0)
    fractions = np.linspace(args.max_fraction / args.points, args.max_fraction, args.points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows = lambda_sweep(grid, weights, Params(th.lambda1, args.q, 2.0, 2.0),
                            [f * th.lambda1 for f in fractions], thresholds=th)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["fraction", "lambda", "delta1", "J_plus", "J_minus", "separation"])
    for f, row in zip(fractions, rows):
        d1 = th.delta1(row.lam) if f < 1 else float("nan")
        writer.writerow([f"{f:.3f}", f"{row.lam:.6g}", f"{d1:.6g}",
                         f"{row.J_plus:.6g}", f"{row.J_minus:.6g}", f"{row.separation:.4g}"])


if __name__ == "__main__":
    main()
