"""Slow, independent reference computations used to check the main path.

Nothing here imports the fibering or energy formulas: fibering values are
recomputed from raw (G, A, B) arithmetic, roots come from dense scans plus
scipy's bracketing solvers, and grid operators are redone with explicit loops.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .grid import Grid, riesz_solve


def fd_derivative(f, t: float, step: float) -> float:
    if not step > 0:
        raise ValueError("finite-difference step must be positive")
    return (f(t + step) - f(t - step)) / (2 * step)


def raw_phi(t, G, A, B, lam, q, p):
    t = np.asarray(t, dtype=float)
    return t * t * G / 2 - lam * np.power(t, q) * A / q - np.power(t, p) * B / p


def raw_phi_prime(t, G, A, B, lam, q, p):
    t = np.asarray(t, dtype=float)
    return t * G - lam * A * np.power(t, q - 1) - B * np.power(t, p - 1)


@dataclass(frozen=True)
class ScanResult:
    bounds: tuple[float, float]
    count: int
    sign_changes: list[tuple[float, float]] = field(default_factory=list)

    @property
    def root_count(self) -> int:
        return len(self.sign_changes)


def scan_fibering(triple, params, bounds=(1e-6, 1e6), count: int = 100_000) -> ScanResult:
    """Brackets of sign changes of φ' on a log-spaced grid."""
    if count < 1000:
        raise ValueError("scan needs at least 1000 points")
    G, A, B = triple
    t = np.geomspace(bounds[0], bounds[1], count)
    s = np.sign(raw_phi_prime(t, G, A, B, params.lam, params.q, params.alpha + params.beta))
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return ScanResult(tuple(bounds), count, [(float(t[i]), float(t[i + 1])) for i in idx])


def scan_roots(triple, params, bounds=(1e-6, 1e6), count: int = 100_000) -> list[tuple[float, str]]:
    """Roots of φ' refined with brentq, tagged 'plus' (φ' rising) or 'minus'."""
    G, A, B = triple
    lam, q, p = params.lam, params.q, params.alpha + params.beta
    out = []
    for lo, hi in scan_fibering(triple, params, bounds, count).sign_changes:
        t = optimize.brentq(lambda s: float(raw_phi_prime(s, G, A, B, lam, q, p)), lo, hi, xtol=1e-300, rtol=1e-15)
        out.append((t, "plus" if raw_phi_prime(lo, G, A, B, lam, q, p) < 0 else "minus"))
    return out


def golden_max(f, lo: float, hi: float) -> tuple[float, float]:
    """Maximizer and maximum of a unimodal f on [lo, hi] by golden-section search."""
    ts = np.linspace(lo, hi, 201)
    k = int(np.clip(np.argmax([f(t) for t in ts]), 1, len(ts) - 2))
    res = optimize.minimize_scalar(lambda t: -f(t), bracket=(ts[k - 1], ts[k], ts[k + 1]), method="golden", tol=1e-12)
    return float(res.x), float(-res.fun)


def bisect_root(f, lo: float, hi: float) -> float:
    return float(optimize.bisect(f, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=2000))


# -- brute-force grid operators -------------------------------------------------

def loop_laplacian(grid: Grid, f) -> np.ndarray:
    n, h = grid.n, grid.h
    if grid.dimension == 1:
        out = np.zeros(n)
        for i in range(n):
            left = f[i - 1] if i > 0 else 0.0
            right = f[i + 1] if i < n - 1 else 0.0
            out[i] = (2 * f[i] - left - right) / h**2
        return out
    F = np.asarray(f).reshape(n, n)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            nb = 0.0
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < n and 0 <= jj < n:
                    nb += F[ii, jj]
            out[i, j] = (4 * F[i, j] - nb) / h**2
    return out.ravel()


def loop_energy(grid: Grid, f) -> float:
    """∫|∇f|² summed edge by edge, boundary edges included."""
    n, h = grid.n, grid.h
    if grid.dimension == 1:
        vals = [0.0, *f, 0.0]
        return sum((vals[i + 1] - vals[i]) ** 2 for i in range(n + 1)) / h
    F = np.zeros((n + 2, n + 2))
    F[1:-1, 1:-1] = np.asarray(f).reshape(n, n)
    total = 0.0
    for i in range(1, n + 1):
        for j in range(n + 1):
            total += (F[i, j + 1] - F[i, j]) ** 2 + (F[j + 1, i] - F[j, i]) ** 2
    return total


def loop_integral(grid: Grid, f) -> float:
    total = 0.0
    for value in f:
        total += value
    return total * grid.h**grid.dimension


def smallest_laplacian_eigenvalue(grid: Grid, iterations: int = 500) -> float:
    """Inverse power iteration for the smallest eigenvalue of -Δ."""
    x = np.ones(grid.node_count)
    lam = 0.0
    for _ in range(iterations):
        y = riesz_solve(grid, x, tol=1e-13)
        new = float(x @ x / (x @ y))
        x = y / np.linalg.norm(y)
        if abs(new - lam) <= 1e-15 * new:
            break
        lam = new
    return new


# -- scalar reduction -----------------------------------------------------------

def _scalar_parts(grid, a, bh, lam, q, p, u):
    Lu = grid.laplacian @ u
    G = grid.cell_volume * float(u @ Lu)
    A = grid.cell_volume * float(np.sum(a * np.abs(u) ** q))
    B = grid.cell_volume * float(np.sum(bh * np.abs(u) ** p))
    return G, A, B, Lu


@dataclass(frozen=True)
class _ScalarParams:
    lam: float
    q: float
    alpha: float
    beta: float


def _scalar_root(G, A, B, lam, q, p, branch):
    roots = scan_roots((G, A, B), _ScalarParams(lam, q, p / 2, p / 2), count=4000)
    roots = [t for t, kind in roots if kind == branch]
    if not roots:
        raise ValueError(f"scalar fibering map has no {branch} critical point")
    return roots[0]


def scalar_reduction_solve(grid: Grid, weight_a, weight_b_half, params, options=None, branch: str = "plus") -> np.ndarray:
    """Nehari descent for the scalar equation -Δu = λa|u|^(q-2)u + (b/2)|u|^(p-2)u.

    With α = β this is the symmetric reduction u = v of the coupled system;
    ``weight_b_half`` is the already-halved coupling weight.
    """
    if params.alpha != params.beta:
        raise ValueError("scalar reduction requires alpha == beta")
    lam, q, p = params.lam, params.q, params.alpha + params.beta
    a, bh = np.asarray(weight_a, float), np.asarray(weight_b_half, float)
    tol = 1e-8 if options is None else options.gradient_tolerance
    max_iter = 5000 if options is None else options.max_outer_iterations

    u = np.ones(grid.node_count)
    for x in grid.coordinates:
        u = u * np.sin(np.pi * x)
    w = a if branch == "plus" else bh
    if np.any(w > 0) and not np.all(w > 0):
        u = np.where(w > 0, u, 0.0)

    def energy(G, A, B):
        return G / 2 - lam * A / q - B / p

    def project(field):
        G, A, B, _ = _scalar_parts(grid, a, bh, lam, q, p, field)
        if not G > 0:
            raise ValueError("zero state has no Nehari projection")
        t = _scalar_root(G, A, B, lam, q, p, branch)
        field = t * field
        G, A, B, Lu = _scalar_parts(grid, a, bh, lam, q, p, field)
        return field, energy(G, A, B), Lu, G / 2 + lam * abs(A) / q + abs(B) / p

    u, J, Lu, scale = project(u)
    step, history = 1.0, []
    for _ in range(max_iter):
        nl = lam * a * np.sign(u) * np.abs(u) ** (q - 1) + bh * np.sign(u) * np.abs(u) ** (p - 1)
        g = riesz_solve(grid, Lu - nl, 1e-10)
        gnorm = float(np.sqrt(grid.cell_volume * g @ (grid.laplacian @ g)))
        history.append(J)
        if gnorm <= tol and len(history) > 5 and max(history[-6:]) - min(history[-6:]) <= 1e-12 * max(1, abs(J)):
            return u
        s = step
        while s >= 1e-12:
            try:
                cand, Jc, Lc, sc = project(np.abs(u - s * g))
            except ValueError:
                s /= 2
                continue
            if Jc <= J - 1e-4 * s * gnorm**2 + 64 * np.finfo(float).eps * scale:
                break
            s /= 2
        else:
            if gnorm <= tol:
                return u
            raise RuntimeError(f"scalar descent stalled at gradient norm {gnorm:.3e}")
        step = min(2 * s, 1.0) if s >= step else s
        u, J, Lu, scale = cand, Jc, Lc, sc
    raise RuntimeError("scalar descent hit its iteration cap")
