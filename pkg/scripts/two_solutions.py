"""Solve both branches at one lambda and print a short comparison.

    python3 scripts/two_solutions.py --weight-a sin2pi --fraction 0.5
"""
import argparse

import numpy as np

from nehari import Grid, Params, compute_thresholds, solve_dual
from nehari.config import resolve_weight
from nehari.energy import Weights


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=201)
    parser.add_argument("--dimension", type=int, default=1)
    parser.add_argument("--weight-a", default="const:1")
    parser.add_argument("--weight-b", default="const:1")
    parser.add_argument("--q", type=float, default=1.5)
    parser.add_argument("--alpha", type=float, default=2.0)
    parser.add_argument("--beta", type=float, default=2.0)
    parser.add_argument("--fraction", type=float, default=0.5, help="lambda as a fraction of lambda1")
    args = parser.parse_args()

    grid = Grid(args.dimension, args.n)
    weights = Weights(resolve_weight(args.weight_a, grid), resolve_weight(args.weight_b, grid))
    th = compute_thresholds(grid, weights, args.q, args.alpha, args.beta)
    params = Params(args.fraction * th.lambda1, args.q, args.alpha, args.beta)
    sol = solve_dual(grid, weights, params, thresholds=th)

    print(f"lambda1 = {th.lambda1:.6g}, lambda = {params.lam:.6g}, delta1 = {th.delta1(params.lam):.6g}")
    for name, rep in (("plus", sol.plus), ("minus", sol.minus)):
        if rep is None:
            print(f"{name:>5}: failed ({sol.errors[name]})")
            continue
        peak = max(np.max(rep.state.u), np.max(rep.state.v))
        print(f"{name:>5}: J = {rep.J_value:.6g}  max = {peak:.4g}  iterations = {rep.iterations}"
              f"  grad = {rep.pde_residual_riesz_norm:.1e}  converged = {rep.converged}")
    print(f"separation = {sol.separation:.4g}, positive = {sol.positive}")


if __name__ == "__main__":
    main()
