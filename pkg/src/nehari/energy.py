"""Euler functional of the coupled concave-convex system and its pieces.

Every fibering formula depends on a state only through three integrals:

    G = ∫|∇u|² + ∫|∇v|²
    A = ∫ a (|u|^q + |v|^q)
    B = ∫ b |u|^α |v|^β
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .grid import Grid, StatePair, apply_laplacian, dirichlet_energy, integrate


@dataclass(frozen=True)
class Params:
    lam: float
    q: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not 1 < self.q < 2:
            raise ValueError(f"q must lie in (1, 2), got {self.q}")
        if not (self.alpha > 1 and self.beta > 1):
            raise ValueError(f"alpha and beta must exceed 1, got {self.alpha}, {self.beta}")

    @property
    def p(self) -> float:
        """Total coupling exponent α + β."""
        return self.alpha + self.beta

    @property
    def p_star(self) -> float:
        return self.p / (self.p - self.q)

    def with_lambda(self, lam: float) -> "Params":
        return replace(self, lam=lam)


@dataclass(frozen=True)
class Weights:
    a: np.ndarray
    b: np.ndarray

    @cached_property
    def a_sup(self) -> float:
        return float(np.max(np.abs(self.a)))

    @cached_property
    def b_plus_sup(self) -> float:
        return float(max(np.max(self.b), 0.0))

    @property
    def sign_diagnostic(self) -> str | None:
        """Non-None when a weight is nowhere positive."""
        missing = [name for name, w in (("a", self.a), ("b", self.b)) if not np.any(w > 0)]
        return f"weight(s) {', '.join(missing)} have no positive sample" if missing else None

    def scaled(self, sa: float = 1.0, sb: float = 1.0) -> "Weights":
        return Weights(sa * self.a, sb * self.b)


class IntegralTriple(NamedTuple):
    G: float
    A: float
    B: float


def weights_from_arrays(grid: Grid, a, b) -> Weights:
    w = Weights(grid.check(a), grid.check(b))
    if w.sign_diagnostic:
        warnings.warn(w.sign_diagnostic, stacklevel=2)
    return w


def signed_power(x: np.ndarray, s: float) -> np.ndarray:
    """|x|^(s-1) x, extended by 0 at x = 0 (continuous for s > 1)."""
    out = np.zeros_like(x)
    nz = x != 0
    out[nz] = np.abs(x[nz]) ** (s - 1) * np.sign(x[nz])
    return out


def integral_triple(grid: Grid, weights: Weights, params: Params, state: StatePair) -> IntegralTriple:
    u, v = state.u, state.v
    G = dirichlet_energy(grid, state)
    A = integrate(grid, weights.a * (np.abs(u) ** params.q + np.abs(v) ** params.q))
    B = integrate(grid, weights.b * np.abs(u) ** params.alpha * np.abs(v) ** params.beta)
    return IntegralTriple(G, A, B)


def energy_from_triple(triple: IntegralTriple, params: Params) -> float:
    G, A, B = triple
    return G / 2 - params.lam / params.q * A - B / params.p


def energy_J(grid: Grid, weights: Weights, params: Params, state: StatePair) -> float:
    return energy_from_triple(integral_triple(grid, weights, params, state), params)


def nehari_constraint(triple: IntegralTriple, params: Params) -> float:
    """⟨J'(u,v), (u,v)⟩ = G - λA - B."""
    G, A, B = triple
    return G - params.lam * A - B


def energy_identities(triple: IntegralTriple, params: Params) -> tuple[float, float]:
    """The two reduced expressions of J valid on the Nehari manifold.

    Returns ``(J1, J2)`` where J1 eliminates A and J2 eliminates B.  Off the
    manifold they differ from J.
    """
    G, A, B = triple
    q, p, lam = params.q, params.p, params.lam
    j1 = (0.5 - 1 / q) * G + (1 / q - 1 / p) * B
    j2 = (0.5 - 1 / p) * G - lam * (1 / q - 1 / p) * A
    return j1, j2


def nonlinearity(grid: Grid, weights: Weights, params: Params, state: StatePair) -> StatePair:
    """Right-hand side of the system evaluated at ``state``."""
    u, v = state.u, state.v
    a, b = weights.a, weights.b
    lam, q, al, be, p = params.lam, params.q, params.alpha, params.beta, params.p
    fu = lam * a * signed_power(u, q) + (al / p) * b * signed_power(u, al) * np.abs(v) ** be
    fv = lam * a * signed_power(v, q) + (be / p) * b * np.abs(u) ** al * signed_power(v, be)
    return StatePair(grid, fu, fv)


def euler_residual(grid: Grid, weights: Weights, params: Params, state: StatePair) -> StatePair:
    """Strong-form residual (-Δu - f_u, -Δv - f_v).

    Its discrete pairing ``h^d <r, w>`` is the directional derivative of J
    along w.
    """
    f = nonlinearity(grid, weights, params, state)
    return StatePair(grid, apply_laplacian(grid, state.u) - f.u, apply_laplacian(grid, state.v) - f.v)


def roundoff_scale(triple: IntegralTriple, params: Params) -> float:
    """Magnitude of the largest term in J; bounds its floating-point error."""
    G, A, B = triple
    return G / 2 + params.lam / params.q * abs(A) + abs(B) / params.p
