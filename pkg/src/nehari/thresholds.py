"""Computable constants behind the small-λ fibering guarantee.

With p = α + β, S_r the embedding constant ‖u‖_r ≤ S_r ‖∇u‖₂:

    δ  = (p-2)/(2p) · (1 / (‖b⁺‖²_∞ S_p^(2p)))^(1/(p-2))
    c  = (1/q) ‖a‖_∞ S_q^q (2p/(p-2))^(q/2)
    λ₁ = δ^((2-q)/2) / (2c)
    δ₁(λ) = δ^(q/2) (δ^((2-q)/2) - λc)

For λ < λ₁ every fibering map with B > 0 is positive at t_max, M⁰ is empty
and J ≥ δ₁(λ) > 0 on M⁻.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .energy import IntegralTriple, Weights
from .grid import ConvergenceError, Grid, field_energy, riesz_solve


def lr_norm(grid: Grid, f: np.ndarray, r: float) -> float:
    return float((grid.cell_volume * np.sum(np.abs(f) ** r)) ** (1 / r))


def sobolev_quotient(grid: Grid, f: np.ndarray, r: float) -> float:
    return lr_norm(grid, f, r) / np.sqrt(field_energy(grid, f))


def estimate_sobolev_constant(
    grid: Grid,
    r: float,
    tol: float = 1e-11,
    seed: int = 0,
    restarts: int = 5,
    max_iter: int = 2000,
) -> float:
    """Estimate sup ‖u‖_r / ‖∇u‖₂ over nonzero grid fields.

    Each restart runs the normalized ascent u ← (-Δ)⁻¹(|u|^(r-2) u), rescaled
    to unit Dirichlet energy, from a positive random start.  ‖u‖_r^r is convex,
    so every step increases the quotient.  Returns the largest limit found.
    """
    if r < 1:
        raise ValueError(f"exponent must be at least 1, got {r}")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        u = np.abs(rng.standard_normal(grid.node_count)) + 0.1
        u /= np.sqrt(field_energy(grid, u))
        value = sobolev_quotient(grid, u, r)
        for _ in range(max_iter):
            w = riesz_solve(grid, np.abs(u) ** (r - 1) * np.sign(u), tol=1e-12)
            u = w / np.sqrt(field_energy(grid, w))
            new = sobolev_quotient(grid, u, r)
            if abs(new - value) <= tol * new:
                value = new
                break
            value = new
        else:
            raise ConvergenceError(f"Sobolev ascent for r={r} did not settle in {max_iter} steps", value)
        best = max(best, value)
    return float(best)


def t_max_h(triple: IntegralTriple, p: float) -> tuple[float, float]:
    """Maximizer and maximum of h(t) = t²G/2 - t^p B/p (p = α + β)."""
    G, _, B = triple
    if not B > 0:
        raise ValueError("h has no interior maximum unless B > 0")
    t_max = (G / B) ** (1 / (p - 2))
    h_max = (p - 2) / (2 * p) * (G**p / B**2) ** (1 / (p - 2))
    return t_max, h_max


@dataclass(frozen=True)
class Thresholds:
    S_q: float
    S_pq: float
    delta: float
    c: float
    lambda1: float
    q: float
    alpha: float
    beta: float
    a_sup: float
    b_plus_sup: float
    seed: int

    def delta1(self, lam: float) -> float:
        """Lower bound for J on M⁻ at parameter ``lam``."""
        q = self.q
        return self.delta ** (q / 2) * (self.delta ** ((2 - q) / 2) - lam * self.c)

    def to_dict(self) -> dict:
        return asdict(self)


def thresholds_from_constants(
    S_q: float, S_pq: float, a_sup: float, b_plus_sup: float, q: float, alpha: float, beta: float, seed: int = 0
) -> Thresholds:
    if not (a_sup > 0 and b_plus_sup > 0):
        raise ValueError("thresholds need ‖a‖_∞ > 0 and ‖b⁺‖_∞ > 0")
    p = alpha + beta
    delta = (p - 2) / (2 * p) * (1 / (b_plus_sup**2 * S_pq ** (2 * p))) ** (1 / (p - 2))
    c = a_sup * S_q**q * (2 * p / (p - 2)) ** (q / 2) / q
    lambda1 = delta ** ((2 - q) / 2) / (2 * c)
    return Thresholds(
        float(S_q), float(S_pq), float(delta), float(c), float(lambda1),
        float(q), float(alpha), float(beta), float(a_sup), float(b_plus_sup), int(seed),
    )


def compute_thresholds(grid: Grid, weights: Weights, q: float, alpha: float, beta: float, seed: int = 0) -> Thresholds:
    if not (1 < q < 2 and alpha > 1 and beta > 1):
        raise ValueError("need 1 < q < 2 and alpha, beta > 1")
    if not (weights.a_sup > 0 and weights.b_plus_sup > 0):
        raise ValueError("degenerate weights: thresholds need ‖a‖_∞ > 0 and ‖b⁺‖_∞ > 0")
    S_q = estimate_sobolev_constant(grid, q, seed=seed)
    S_pq = estimate_sobolev_constant(grid, alpha + beta, seed=seed)
    return thresholds_from_constants(S_q, S_pq, weights.a_sup, weights.b_plus_sup, q, alpha, beta, seed)
