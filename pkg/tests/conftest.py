import numpy as np
import pytest

from nehari.energy import Weights
from nehari.grid import Grid
from nehari.thresholds import compute_thresholds

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def unit_weights(grid):
    return Weights(np.ones(grid.node_count), np.ones(grid.node_count))


@pytest.fixture(scope="session")
def thresholds_400():
    grid = Grid(1, 400)
    return compute_thresholds(grid, unit_weights(grid), 1.5, 2.0, 2.0)


@pytest.fixture(scope="session")
def thresholds_201():
    grid = Grid(1, 201)
    return compute_thresholds(grid, unit_weights(grid), 1.5, 2.0, 2.0)
