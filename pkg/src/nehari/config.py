"""Run configuration: a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored.  Weight specs are either a preset
(``const:<c>``, ``sin2pi``, ``step:<x0>``) or a path to a field file, resolved
relative to the config file.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .energy import Params, Weights, weights_from_arrays
from .grid import Grid, read_field
from .solver import SolveOptions


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    dimension: int = 1
    n: int = 201
    weight_a: str = "const:1"
    weight_b: str = "const:1"
    q: float = 1.5
    alpha: float = 2.0
    beta: float = 2.0
    lam: float | None = None
    lambda_fraction: float | None = None
    sweep_fractions: tuple[float, ...] = (0.1, 0.5, 0.9)
    max_outer_iterations: int = 5000
    step_size: float = 1.0
    backtrack: float = 0.5
    gradient_tolerance: float = 1e-8
    constraint_tolerance: float = 1e-10
    positivity: bool = True
    seed: int = 0
    base_dir: str = "."

    @property
    def grid(self) -> Grid:
        return Grid(self.dimension, self.n)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(
            max_outer_iterations=self.max_outer_iterations,
            step_size=self.step_size,
            backtrack=self.backtrack,
            gradient_tolerance=self.gradient_tolerance,
            constraint_tolerance=self.constraint_tolerance,
            positivity=self.positivity,
            seed=self.seed,
        )

    def params(self, lambda1: float | None = None) -> Params:
        if self.lam is not None:
            return Params(self.lam, self.q, self.alpha, self.beta)
        if lambda1 is None:
            raise ValueError("lambda_fraction mode needs lambda1")
        return Params(self.lambda_fraction * lambda1, self.q, self.alpha, self.beta)

    def weights(self) -> Weights:
        grid = self.grid
        return weights_from_arrays(
            grid,
            resolve_weight(self.weight_a, grid, self.base_dir, "weight_a"),
            resolve_weight(self.weight_b, grid, self.base_dir, "weight_b"),
        )

    def echo(self) -> str:
        """Config text with every default materialized; parses back to an equal config."""
        lines = []
        for f in fields(self):
            if f.name == "base_dir":
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            key = "lambda" if f.name == "lam" else f.name
            if isinstance(value, tuple):
                text = ", ".join(repr(float(v)) for v in value)
            elif isinstance(value, bool):
                text = "true" if value else "false"
            else:
                text = repr(value) if isinstance(value, float) else str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"


def resolve_weight(spec: str, grid: Grid, base_dir: str = ".", key: str = "weight") -> np.ndarray:
    x = grid.coordinates[0]
    name, _, arg = spec.partition(":")
    try:
        if name == "const":
            return np.full(grid.node_count, float(arg))
        if name == "sin2pi" and not arg:
            return np.sin(2 * np.pi * x)
        if name == "step":
            return np.where(x < float(arg), 1.0, -1.0)
    except ValueError as exc:
        raise ConfigError(key, f"bad preset argument in {spec!r}") from exc
    path = Path(base_dir) / spec
    if not path.is_file():
        raise ConfigError(key, f"no preset or file named {spec!r}")
    try:
        return read_field(path, grid)[1]
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from exc


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    name = "lam" if key == "lambda" else key
    kind = _TYPES[name]
    try:
        if kind == "int":
            return int(raw)
        if kind in ("float", "float | None"):
            return float(raw)
        if kind == "bool":
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if kind == "tuple[float, ...]":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {raw!r} as {kind}") from exc


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.dimension not in (1, 2):
        raise ConfigError("dimension", "must be 1 or 2")
    if cfg.n < 2:
        raise ConfigError("n", "must be at least 2")
    if not 1 < cfg.q < 2:
        raise ConfigError("q", f"must lie in (1, 2), got {cfg.q}")
    if not cfg.alpha > 1:
        raise ConfigError("alpha", "must exceed 1")
    if not cfg.beta > 1:
        raise ConfigError("beta", "must exceed 1")
    if cfg.alpha + cfg.beta <= 2:
        raise ConfigError("alpha", "alpha + beta must exceed 2")
    if (cfg.lam is None) == (cfg.lambda_fraction is None):
        raise ConfigError("lambda", "set exactly one of lambda and lambda_fraction")
    if cfg.lam is not None and not cfg.lam > 0:
        raise ConfigError("lambda", "must be positive")
    if cfg.lambda_fraction is not None and not cfg.lambda_fraction > 0:
        raise ConfigError("lambda_fraction", "must be positive")
    if any(f <= 0 for f in cfg.sweep_fractions):
        raise ConfigError("sweep_fractions", "must be positive")
    try:
        cfg.solve_options()
    except ValueError as exc:
        raise ConfigError("solve options", str(exc)) from exc
    grid = cfg.grid
    resolve_weight(cfg.weight_a, grid, cfg.base_dir, "weight_a")
    resolve_weight(cfg.weight_b, grid, cfg.base_dir, "weight_b")
    return cfg


def parse_config_text(text: str, base_dir: str = ".") -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep:
            raise ConfigError(key or f"line {lineno}", "expected 'key = value'")
        name = "lam" if key == "lambda" else key
        if name not in _TYPES or name == "base_dir":
            raise ConfigError(key, "unknown key")
        if name in values:
            raise ConfigError(key, "given twice")
        values[name] = _convert(key, raw)
    return validate(RunConfig(**values, base_dir=str(base_dir)))


def parse_config(path) -> RunConfig:
    path = Path(path)
    return parse_config_text(path.read_text(), str(path.parent))


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    return dataclasses.replace(cfg, seed=seed)
