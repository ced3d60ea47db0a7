"""Minimization of J on the Nehari branches M⁺ and M⁻.

Descent runs on the reduced functional w ↦ J(t(w) w), where t(w) is the
branch root of the fibering map.  At a Nehari point the radial part of ∇J
vanishes, so the Sobolev gradient (-Δ)⁻¹ r of the Euler residual r is
already tangent to the manifold and serves as the descent direction.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .energy import (
    Params,
    Weights,
    energy_from_triple,
    euler_residual,
    integral_triple,
    nehari_constraint,
    roundoff_scale,
)
from .fibering import BranchError, NehariClass, on_manifold_forms, project_to_nehari
from .grid import Grid, StatePair, integrate, riesz_norm, riesz_solve
from .thresholds import Thresholds, compute_thresholds

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolveOptions:
    max_outer_iterations: int = 5000
    step_size: float = 1.0
    max_step: float = 1.0
    backtrack: float = 0.5
    min_step: float = 1e-12
    armijo: float = 1e-4
    gradient_tolerance: float = 1e-8
    constraint_tolerance: float = 1e-10
    stagnation_tolerance: float = 1e-12
    stagnation_window: int = 5
    positivity: bool = True
    riesz_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        for name in ("step_size", "max_step", "min_step", "gradient_tolerance",
                     "constraint_tolerance", "stagnation_tolerance", "riesz_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must lie in (0, 1)")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be at least 1")


class IterationRecord(NamedTuple):
    J: float
    grad_norm: float
    step: float
    slack: float
    phi2: float
    uv_gap: float


@dataclass
class SolutionReport:
    state: StatePair
    branch: NehariClass
    J_value: float
    constraint_residual: float
    pde_residual_riesz_norm: float
    interior_min: float
    iterations: int
    converged: bool
    history: list[IterationRecord] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "branch": self.branch.value,
            "J": self.J_value,
            "constraint_residual": self.constraint_residual,
            "pde_residual_riesz_norm": self.pde_residual_riesz_norm,
            "interior_min": self.interior_min,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def default_initializer(grid: Grid, weights: Weights, params: Params, branch: NehariClass) -> StatePair:
    """Discrete first-eigenfunction bump, restricted to where the relevant weight is positive.

    The plus branch uses the support of a⁺, the minus branch that of b⁺.  A
    weight with no positive sample leaves the bump unmasked.
    """
    bump = np.ones(grid.node_count)
    for x in grid.coordinates:
        bump = bump * np.sin(np.pi * x)
    w = weights.a if NehariClass(branch) is NehariClass.PLUS else weights.b
    mask = w > 0
    if mask.any() and not mask.all():
        bump = np.where(mask, bump, 0.0)
    return StatePair(grid, bump.copy(), bump.copy())


def sobolev_gradient(grid: Grid, weights: Weights, params: Params, state: StatePair, tol: float) -> StatePair:
    r = euler_residual(grid, weights, params, state)
    return StatePair(grid, riesz_solve(grid, r.u, tol), riesz_solve(grid, r.v, tol))


def _check_branch_data(grid, weights, params, state, branch):
    _, A, B = integral_triple(grid, weights, params, state)
    if branch is NehariClass.PLUS and not A > 0:
        raise BranchError(f"plus branch needs ∫a(|u|^q+|v|^q) > 0, initial state has {A:.3e}")
    if branch is NehariClass.MINUS and not B > 0:
        raise BranchError(f"minus branch needs ∫b|u|^α|v|^β > 0, initial state has {B:.3e}")


def minimize_on_branch(
    grid: Grid,
    weights: Weights,
    params: Params,
    branch: NehariClass,
    init: StatePair,
    options: SolveOptions = SolveOptions(),
) -> SolutionReport:
    """Sobolev-gradient descent of J restricted to one Nehari branch.

    Steps are accepted when J decreases by the Armijo amount, up to a
    floating-point slack proportional to the largest term of J.
    """
    branch = NehariClass(branch)
    if branch is NehariClass.ZERO:
        raise ValueError("minimization runs on the plus or minus branch")
    _check_branch_data(grid, weights, params, init, branch)
    proj = project_to_nehari(grid, weights, params, init, branch)
    state, triple = proj.state, proj.triple
    J = energy_from_triple(triple, params)
    history: list[IterationRecord] = []
    step = options.step_size
    converged = False
    gnorm = np.inf
    it = 0

    for it in range(options.max_outer_iterations):
        g = sobolev_gradient(grid, weights, params, state, options.riesz_tol)
        gnorm = riesz_norm(grid, g)
        slack = 64 * EPS * roundoff_scale(triple, params)
        history.append(IterationRecord(
            J, gnorm, step, float(slack), on_manifold_forms(triple, params)[0],
            float(np.max(np.abs(state.u - state.v))),
        ))
        window = [rec.J for rec in history[-options.stagnation_window - 1:]]
        stagnant = (len(window) > options.stagnation_window
                    and max(window) - min(window) <= options.stagnation_tolerance * max(1.0, abs(J)))
        if gnorm <= options.gradient_tolerance and stagnant:
            converged = True
            break

        s = step
        accepted = False
        while s >= options.min_step:
            trial = state - g.scaled(s)
            if options.positivity:
                trial = trial.abs()
            try:
                tproj = project_to_nehari(grid, weights, params, trial, branch)
            except (BranchError, ValueError):
                s *= options.backtrack
                continue
            J_trial = energy_from_triple(tproj.triple, params)
            if J_trial <= J - options.armijo * s * gnorm**2 + slack:
                accepted = True
                break
            s *= options.backtrack
        if not accepted:
            log.info("%s branch: line search stalled at iteration %d (|g| = %.3e)", branch.value, it, gnorm)
            converged = gnorm <= options.gradient_tolerance
            break
        state, triple, J = tproj.state, tproj.triple, J_trial
        step = min(s / options.backtrack, options.max_step) if s >= step else s

    constraint = abs(nehari_constraint(triple, params)) / triple.G
    converged = converged and constraint <= options.constraint_tolerance
    return SolutionReport(
        state=state,
        branch=branch,
        J_value=J,
        constraint_residual=constraint,
        pde_residual_riesz_norm=gnorm,
        interior_min=float(min(state.u.min(), state.v.min())),
        iterations=len(history),
        converged=converged,
        history=history,
    )


@dataclass
class DualSolution:
    lam: float
    plus: SolutionReport | None
    minus: SolutionReport | None
    separation: float
    lambda1: float | None = None
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return (
            self.plus is not None and self.minus is not None
            and self.plus.converged and self.minus.converged
        )

    @property
    def positive(self) -> bool:
        return self.complete and self.plus.interior_min > 0 and self.minus.interior_min > 0

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "lambda1": self.lambda1,
            "complete": self.complete,
            "positive": self.positive,
            "separation": self.separation,
            "plus": self.plus.summary() if self.plus else None,
            "minus": self.minus.summary() if self.minus else None,
            "errors": dict(self.errors),
        }


def l2_norm(grid: Grid, s: StatePair) -> float:
    return float(np.sqrt(integrate(grid, s.u**2 + s.v**2)))


def separation(grid: Grid, s1: StatePair, s2: StatePair) -> float:
    """Relative L² distance between two states."""
    return l2_norm(grid, s1 - s2) / max(l2_norm(grid, s1), l2_norm(grid, s2))


def solve_dual(
    grid: Grid,
    weights: Weights,
    params: Params,
    options: SolveOptions = SolveOptions(),
    thresholds: Thresholds | None = None,
) -> DualSolution:
    """Minimize on both branches from the default initializers."""
    if thresholds is None:
        thresholds = compute_thresholds(grid, weights, params.q, params.alpha, params.beta, seed=options.seed)
    if params.lam >= thresholds.lambda1:
        warnings.warn(
            f"lambda={params.lam:.6g} is not below lambda1={thresholds.lambda1:.6g}; no existence guarantee",
            stacklevel=2,
        )
    reports: dict[NehariClass, SolutionReport | None] = {}
    errors = {}
    for branch in (NehariClass.PLUS, NehariClass.MINUS):
        init = default_initializer(grid, weights, params, branch)
        try:
            reports[branch] = minimize_on_branch(grid, weights, params, branch, init, options)
        except BranchError as exc:
            log.warning("%s branch failed: %s", branch.value, exc)
            reports[branch] = None
            errors[branch.value] = str(exc)
        else:
            if not reports[branch].converged:
                errors[branch.value] = "not converged"
    plus, minus = reports[NehariClass.PLUS], reports[NehariClass.MINUS]
    sep = separation(grid, plus.state, minus.state) if plus and minus else float("nan")
    return DualSolution(params.lam, plus, minus, sep, thresholds.lambda1, errors)


class SweepRow(NamedTuple):
    lam: float
    J_plus: float
    J_minus: float
    conv_plus: bool
    conv_minus: bool
    separation: float


def lambda_sweep(
    grid: Grid,
    weights: Weights,
    params_base: Params,
    lambda_values,
    options: SolveOptions = SolveOptions(),
    thresholds: Thresholds | None = None,
) -> list[SweepRow]:
    lambda_values = list(lambda_values)
    if not lambda_values:
        return []
    if any(lam <= 0 for lam in lambda_values):
        raise ValueError("lambda values must be positive")
    if thresholds is None:
        thresholds = compute_thresholds(
            grid, weights, params_base.q, params_base.alpha, params_base.beta, seed=options.seed
        )
    rows = []
    for lam in lambda_values:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sol = solve_dual(grid, weights, params_base.with_lambda(lam), options, thresholds)
        rows.append(SweepRow(
            lam,
            sol.plus.J_value if sol.plus else float("nan"),
            sol.minus.J_value if sol.minus else float("nan"),
            bool(sol.plus and sol.plus.converged),
            bool(sol.minus and sol.minus.converged),
            sol.separation,
        ))
    return rows
