"""Finite-difference Dirichlet calculus on the unit interval / unit square.

Fields are flat float arrays holding interior nodal values; the boundary
value is implicitly zero.  In 2D the flat index is ``iy * n + ix`` so that
``values.reshape(n, n)`` gives one row per horizontal grid line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg


class ConvergenceError(RuntimeError):
    """An iterative method hit its iteration cap.

    ``residual`` carries the best residual measure reached.
    """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class Grid:
    dimension: int
    n: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"unsupported dimension {self.dimension}; expected 1 or 2")
        if self.n < 2:
            raise ValueError(f"need at least 2 interior nodes per axis, got n={self.n}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def node_count(self) -> int:
        return self.n**self.dimension

    @property
    def cell_volume(self) -> float:
        return self.h**self.dimension

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Nodal coordinates, one flat array per axis (x first)."""
        x1 = self.h * np.arange(1, self.n + 1)
        if self.dimension == 1:
            return (x1,)
        yy, xx = np.meshgrid(x1, x1, indexing="ij")
        return (xx.ravel(), yy.ravel())

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """Sparse matrix of -Δ (3-point / 5-point stencil, zero boundary)."""
        n, h = self.n, self.h
        lap1 = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) / h**2
        if self.dimension == 1:
            return lap1.tocsr()
        eye = sp.identity(n)
        return (sp.kron(eye, lap1) + sp.kron(lap1, eye)).tocsr()

    def zeros(self) -> np.ndarray:
        return np.zeros(self.node_count)

    def check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.node_count,):
            raise ValueError(f"field has shape {f.shape}, grid expects ({self.node_count},)")
        if not np.all(np.isfinite(f)):
            raise ValueError("field contains non-finite values")
        return f


def build_grid(dimension: int, n: int) -> Grid:
    return Grid(dimension, n)


@dataclass(frozen=True)
class StatePair:
    """The pair (u, v); both components live on ``grid``."""

    grid: Grid
    u: np.ndarray
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "u", self.grid.check(self.u))
        object.__setattr__(self, "v", self.grid.check(self.v))

    def scaled(self, t: float) -> "StatePair":
        return StatePair(self.grid, t * self.u, t * self.v)

    def __add__(self, other: "StatePair") -> "StatePair":
        return StatePair(self.grid, self.u + other.u, self.v + other.v)

    def __sub__(self, other: "StatePair") -> "StatePair":
        return StatePair(self.grid, self.u - other.u, self.v - other.v)

    def abs(self) -> "StatePair":
        return StatePair(self.grid, np.abs(self.u), np.abs(self.v))

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])


def integrate(grid: Grid, f: np.ndarray) -> float:
    return grid.cell_volume * float(np.sum(f))


def _edge_sum(grid: Grid, f: np.ndarray) -> float:
    """Sum of squared differences over all grid edges, boundary edges included."""
    n = grid.n
    if grid.dimension == 1:
        return float(np.sum(np.diff(np.pad(f, 1)) ** 2))
    g = np.pad(f.reshape(n, n), 1)
    return float(np.sum(np.diff(g, axis=0)[:, 1:-1] ** 2) + np.sum(np.diff(g, axis=1)[1:-1, :] ** 2))


def field_energy(grid: Grid, f: np.ndarray) -> float:
    """∫|∇f|² by forward differences; zero only for the zero field."""
    return grid.h ** (grid.dimension - 2) * _edge_sum(grid, f)


def dirichlet_energy(grid: Grid, s: StatePair) -> float:
    return field_energy(grid, s.u) + field_energy(grid, s.v)


def apply_laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    return grid.laplacian @ f


def riesz_solve(grid: Grid, rhs: np.ndarray, tol: float = 1e-10, maxiter: int | None = None) -> np.ndarray:
    """Solve -Δw = rhs by conjugate gradients.

    Raises ConvergenceError when the relative residual does not reach ``tol``
    within ``maxiter`` iterations (default ``10 * node_count``).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rhs = np.asarray(rhs, dtype=float)
    norm = np.linalg.norm(rhs)
    if norm == 0.0:
        return np.zeros_like(rhs)
    maxiter = 10 * grid.node_count if maxiter is None else maxiter
    w, info = cg(grid.laplacian, rhs, rtol=tol, atol=0.0, maxiter=maxiter)
    res = np.linalg.norm(grid.laplacian @ w - rhs) / norm
    if info != 0 and res > tol:
        raise ConvergenceError(f"CG stopped after {maxiter} iterations at relative residual {res:.3e}", res)
    return w


def riesz_norm(grid: Grid, g: StatePair) -> float:
    """H¹₀ norm of a pair, i.e. the square root of its Dirichlet energy."""
    return float(np.sqrt(dirichlet_energy(grid, g)))


def write_field(path, grid: Grid, f: np.ndarray) -> None:
    f = grid.check(f)
    rows = f.reshape(1, -1) if grid.dimension == 1 else f.reshape(grid.n, grid.n)
    with open(path, "w") as fh:
        fh.write(f"{grid.dimension}\n{grid.n}\n")
        for row in rows:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def read_field(path, grid: Grid | None = None) -> tuple[Grid, np.ndarray]:
    """Load a field file; if ``grid`` is given the file must match it."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if len(lines) < 3:
        raise ValueError(f"{path}: truncated field file")
    file_grid = Grid(int(lines[0]), int(lines[1]))
    values = np.array([float(x) for ln in lines[2:] for x in ln.split()])
    if grid is not None and grid != file_grid:
        raise ValueError(f"{path}: field is on {file_grid}, expected {grid}")
    return file_grid, file_grid.check(values)
