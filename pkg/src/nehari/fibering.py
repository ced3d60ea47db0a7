"""Fibering maps t ↦ J(tu, tv) and projection onto the Nehari branches.

Everything here is closed-form in the integral triple (G, A, B).  With
p = α + β the key relation is

    φ'(t) = t^(q-1) (m(t) - λA),   m(t) = t^(2-q) G - t^(p-q) B,

so Nehari multiples of a state are the roots of m(t) = λA, and a root lies on
M⁺ (M⁻) when m'(t) > 0 (< 0).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .energy import IntegralTriple, Params, Weights, integral_triple, nehari_constraint
from .grid import Grid, StatePair

DEGENERACY_TOL = 1e-9


class NehariClass(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    ZERO = "zero"


class FiberingCase(str, enum.Enum):
    NO_CRITICAL_INCREASING = "NoCritical_Increasing"
    UNIQUE_MIN = "UniqueMin"
    UNIQUE_MAX = "UniqueMax"
    MIN_THEN_MAX = "MinThenMax"
    NO_CRITICAL_DECREASING = "NoCritical_Decreasing"
    DEGENERATE = "Degenerate"


class BranchError(ValueError):
    """The requested Nehari branch does not exist along this ray."""

    def __init__(self, message: str, case: FiberingCase | None = None):
        super().__init__(message)
        self.case = case


@dataclass(frozen=True)
class FiberingGeometry:
    case: FiberingCase
    roots: list[tuple[float, NehariClass]] = field(default_factory=list)
    t_star: float | None = None
    m_peak: float | None = None

    @property
    def degenerate(self) -> bool:
        return self.case is FiberingCase.DEGENERATE

    def root_for(self, branch: NehariClass) -> float:
        for t, cls in self.roots:
            if cls is branch:
                return t
        raise BranchError(f"no {branch.value} root: fibering geometry is {self.case.value}", self.case)

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "roots": [{"t": t, "class": c.value} for t, c in self.roots],
            "t_star": self.t_star,
            "m_peak": self.m_peak,
        }


def phi(t: float, triple: IntegralTriple, params: Params) -> float:
    G, A, B = triple
    if t == 0:
        return 0.0
    q, p = params.q, params.p
    return 0.5 * t**2 * G - params.lam * t**q / q * A - t**p / p * B


def phi_prime(t: float, triple: IntegralTriple, params: Params) -> float:
    G, A, B = triple
    q, p = params.q, params.p
    return t * G - params.lam * t ** (q - 1) * A - t ** (p - 1) * B


def phi_second(t: float, triple: IntegralTriple, params: Params) -> float:
    G, A, B = triple
    q, p = params.q, params.p
    return G - (q - 1) * params.lam * t ** (q - 2) * A - (p - 1) * t ** (p - 2) * B


def on_manifold_forms(triple: IntegralTriple, params: Params) -> tuple[float, float]:
    """φ''(1) with A eliminated, and with B eliminated, via G = λA + B."""
    G, A, B = triple
    q, p = params.q, params.p
    return (2 - q) * G - (p - q) * B, (2 - p) * G + (p - q) * params.lam * A


def phi_second_on_manifold(triple: IntegralTriple, params: Params, tol: float = 1e-8) -> float:
    G, A, B = triple
    scale = max(G, params.lam * abs(A), abs(B))
    if abs(nehari_constraint(triple, params)) > tol * scale:
        raise ValueError("state is off the Nehari manifold; project it first")
    return on_manifold_forms(triple, params)[0]


def m_value(t: float, triple: IntegralTriple, params: Params) -> float:
    G, _, B = triple
    q, p = params.q, params.p
    return t ** (2 - q) * G - t ** (p - q) * B


def m_prime(t: float, triple: IntegralTriple, params: Params) -> float:
    G, _, B = triple
    q, p = params.q, params.p
    return (2 - q) * t ** (1 - q) * G - (p - q) * t ** (p - q - 1) * B


def m_peak(triple: IntegralTriple, params: Params) -> tuple[float, float]:
    """Location and value of the maximum of m; requires G > 0 and B > 0."""
    G, _, B = triple
    q, p = params.q, params.p
    t_star = ((2 - q) * G / ((p - q) * B)) ** (1 / (p - 2))
    return t_star, m_value(t_star, triple, params)


def _refine_root(f, df, lo: float, hi: float, rtol: float = 1e-12) -> float:
    """Root of f on [lo, hi] (sign change assumed): log-bisection, then safeguarded Newton."""
    flo = f(lo)
    if flo == 0:
        return lo
    fhi = f(hi)
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo!r}, {hi!r}]")
    while hi / lo - 1 > 1e-6:
        mid = math.sqrt(lo * hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(100):
        ft = f(t)
        if ft == 0:
            return t
        if (ft > 0) == (flo > 0):
            lo, flo = t, ft
        else:
            hi = t
        d = df(t)
        step = ft / d if d != 0 else math.inf
        t_new = t - step
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        done = abs(t_new - t) <= rtol * t
        t = t_new
        if done:
            break
    # polish a converged iterate to full precision
    for _ in range(3):
        ft, d = f(t), df(t)
        if ft == 0 or d == 0 or abs(ft / d) > 1e-9 * t:
            break
        t -= ft / d
    return t


def _classify_root(t: float, triple: IntegralTriple, params: Params) -> NehariClass:
    return NehariClass.PLUS if m_prime(t, triple, params) > 0 else NehariClass.MINUS


def classify_and_roots(triple: IntegralTriple, params: Params) -> FiberingGeometry:
    G, A, B = triple
    if not G > 0:
        raise ValueError("fibering geometry is undefined for the zero state")
    q, p, lam = params.q, params.p, params.lam
    target = lam * A

    def f(t):
        return m_value(t, triple, params) - target

    def df(t):
        return m_prime(t, triple, params)

    if A <= 0 and B <= 0:
        return FiberingGeometry(FiberingCase.NO_CRITICAL_INCREASING)

    if B <= 0:
        # m increases from 0 to ∞ and m(t) ≥ t^(2-q) G
        hi = 2 * (target / G) ** (1 / (2 - q))
        lo = 0.5 * hi
        while f(lo) >= 0:
            lo *= 0.5
        t = _refine_root(f, df, lo, hi)
        return FiberingGeometry(FiberingCase.UNIQUE_MIN, [(t, _classify_root(t, triple, params))])

    t_star, peak = m_peak(triple, params)
    if A <= 0:
        lo = t_star  # m decreases past its peak, which is ≥ 0 ≥ λA
        hi = max(2 * t_star, 2 * (2 * G / B) ** (1 / (p - 2)))
        while f(hi) >= 0:
            hi *= 2
        t = _refine_root(f, df, lo, hi)
        return FiberingGeometry(FiberingCase.UNIQUE_MAX, [(t, _classify_root(t, triple, params))], t_star, peak)

    if abs(target - peak) <= DEGENERACY_TOL * max(1.0, peak):
        return FiberingGeometry(FiberingCase.DEGENERATE, [(t_star, NehariClass.ZERO)], t_star, peak)
    if target > peak:
        return FiberingGeometry(FiberingCase.NO_CRITICAL_DECREASING, [], t_star, peak)

    lo = 0.5 * t_star
    while f(lo) >= 0:
        lo *= 0.5
    t1 = _refine_root(f, df, lo, t_star)
    hi = max(2 * t_star, 2 * (2 * G / B) ** (1 / (p - 2)))
    while f(hi) >= 0:
        hi *= 2
    t2 = _refine_root(f, df, t_star, hi)
    roots = [(t, _classify_root(t, triple, params)) for t in (t1, t2)]
    return FiberingGeometry(FiberingCase.MIN_THEN_MAX, roots, t_star, peak)


class Projection(NamedTuple):
    state: StatePair
    t: float
    label: NehariClass
    triple: IntegralTriple


def project_triple(triple: IntegralTriple, params: Params, branch: NehariClass) -> float:
    """Scaling factor sending a state with ``triple`` to the requested branch."""
    branch = NehariClass(branch)
    if branch is NehariClass.ZERO:
        raise ValueError("cannot project onto the degenerate set")
    return classify_and_roots(triple, params).root_for(branch)


def project_to_nehari(
    grid: Grid, weights: Weights, params: Params, state: StatePair, branch: NehariClass
) -> Projection:
    triple = integral_triple(grid, weights, params, state)
    t = project_triple(triple, params, branch)
    scaled = state.scaled(t)
    new_triple = integral_triple(grid, weights, params, scaled)
    return Projection(scaled, t, NehariClass(branch), new_triple)
