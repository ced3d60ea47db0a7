"""Two positive solutions of a concave-convex Laplacian system via the Nehari manifold."""
from .energy import IntegralTriple, Params, Weights, energy_J, integral_triple, nehari_constraint
from .fibering import FiberingCase, NehariClass, classify_and_roots, project_to_nehari
from .grid import Grid, StatePair, build_grid
from .solver import SolveOptions, lambda_sweep, minimize_on_branch, solve_dual
from .thresholds import compute_thresholds

__all__ = [
    "FiberingCase",
    "Grid",
    "IntegralTriple",
    "NehariClass",
    "Params",
    "SolveOptions",
    "StatePair",
    "Weights",
    "build_grid",
    "classify_and_roots",
    "compute_thresholds",
    "energy_J",
    "integral_triple",
    "lambda_sweep",
    "minimize_on_branch",
    "nehari_constraint",
    "project_to_nehari",
    "solve_dual",
]
