"""End-to-end acceptance checks.

Each test appends one PASS/FAIL line to the terminal summary before it asserts,
so a single ``pytest`` run reports every criterion even when one fails.
"""
import filecmp
import time
import warnings

import numpy as np
import pytest

from nehari import oracle, verification
from nehari.cli import main
from nehari.energy import Params, Weights, energy_from_triple, energy_identities, integral_triple, nehari_constraint
from nehari.fibering import NehariClass, classify_and_roots, phi, project_to_nehari
from nehari.grid import Grid, riesz_solve
from nehari.solver import solve_dual
from nehari.thresholds import compute_thresholds, estimate_sobolev_constant, t_max_h

from .conftest import ACCEPTANCE_LINES, unit_weights

SEED = 20261016


def report(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number:2d} {title}: {detail}")


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_01_master_identity():
    with Timer() as clock:
        res = verification.master_identity(np.random.default_rng(SEED), 1000)
    ok = res.failed == 0 and res.checked == 1000 and clock.elapsed < 1.0
    report(1, "master fibering identity", ok, f"{res.failed}/{res.checked} failed, worst {res.worst:.2e}, {clock.elapsed:.2f}s")
    assert ok


def test_02_derivative_chain():
    with Timer() as clock:
        res = verification.derivative_chain(np.random.default_rng(SEED), 200, 1e-5)
    ok = res.failed == 0 and res.checked == 200 and clock.elapsed < 1.0
    report(2, "derivative chain vs central differences", ok,
           f"{res.failed}/{res.checked} failed, worst {res.worst:.2e}, {clock.elapsed:.2f}s")
    assert ok


def test_03_energy_identities_on_manifold():
    rng = np.random.default_rng(SEED)
    grid = Grid(1, 101)
    weights = unit_weights(grid)
    params = Params(1.0, 1.5, 2.0, 2.0)
    worst_id = worst_c = 0.0
    done = 0
    with Timer() as clock:
        while done < 100:
            state = verification.random_state(rng, grid)
            branch = NehariClass.PLUS if done % 2 == 0 else NehariClass.MINUS
            geom = classify_and_roots(integral_triple(grid, weights, params, state), params)
            if not any(c is branch for _, c in geom.roots):
                continue
            proj = project_to_nehari(grid, weights, params, state, branch)
            J = energy_from_triple(proj.triple, params)
            j1, j2 = energy_identities(proj.triple, params)
            worst_id = max(worst_id, verification.rel_err(J, j1, 0), verification.rel_err(J, j2, 0))
            worst_c = max(worst_c, abs(nehari_constraint(proj.triple, params)) / proj.triple.G)
            done += 1
    ok = worst_id <= 1e-10 and worst_c <= 1e-10 and clock.elapsed < 10
    report(3, "alternative energy forms on the manifold", ok,
           f"identity {worst_id:.2e}, constraint/G {worst_c:.2e}, {clock.elapsed:.2f}s")
    assert ok


@pytest.fixture(scope="module")
def quadrant():
    with Timer() as clock:
        table, ident = verification.quadrant_table(np.random.default_rng(SEED), 500)
    return table, ident, clock.elapsed


def test_04_quadrant_table(quadrant):
    table, _, elapsed = quadrant
    ok = table.failed == 0 and table.checked == 500 and elapsed < 30
    report(4, "quadrant root counts vs dense scan", ok, f"{table.failed}/{table.checked} mismatches, {elapsed:.2f}s")
    assert ok


def test_05_second_derivative_forms(quadrant):
    _, ident, _ = quadrant
    ok = ident.failed == 0 and ident.checked > 0
    report(5, "second-derivative scaling and form agreement", ok,
           f"{ident.failed}/{ident.checked} roots failed, worst {ident.worst:.2e}")
    assert ok


@pytest.fixture(scope="module")
def guarantee_run(thresholds_400):
    grid = Grid(1, 400)
    weights = unit_weights(grid)
    th = thresholds_400
    params = Params(0.9 * th.lambda1, 1.5, 2.0, 2.0)
    rng = np.random.default_rng(SEED)
    positive_peak = degenerate = 0
    checked_b = 0
    minus_J = []
    with Timer() as clock:
        for _ in range(1000):
            state = verification.random_state(rng, grid)
            triple = integral_triple(grid, weights, params, state)
            geom = classify_and_roots(triple, params)
            degenerate += geom.degenerate
            if triple.B > 0:
                checked_b += 1
                t_max, _ = t_max_h(triple, params.p)
                positive_peak += phi(t_max, triple, params) > 0
            for t, c in geom.roots:
                if c is NehariClass.MINUS:
                    minus_J.append(energy_from_triple(
                        integral_triple(grid, weights, params, state.scaled(t)), params))
    return th, params, checked_b, positive_peak, degenerate, minus_J, clock.elapsed


def test_06_threshold_guarantee(guarantee_run):
    _, _, checked_b, positive_peak, degenerate, _, elapsed = guarantee_run
    ok = checked_b > 0 and positive_peak == checked_b and degenerate == 0 and elapsed < 60
    report(6, "phi(t_max) > 0 and no degenerate state below lambda1", ok,
           f"{positive_peak}/{checked_b} positive, {degenerate} degenerate, {elapsed:.2f}s")
    assert ok


def test_07_minus_energy_gap(guarantee_run):
    th, params, _, _, _, minus_J, _ = guarantee_run
    d1 = th.delta1(params.lam)
    low = min(minus_J)
    ok = len(minus_J) > 0 and d1 > 0 and low >= d1
    report(7, "minus-branch energy gap", ok, f"min J {low:.4g} >= delta1 {d1:.4g} over {len(minus_J)} projections")
    assert ok


def _dual_check(number, title, weights, th, budget):
    grid = Grid(1, 201)
    params = Params(0.5 * th.lambda1, 1.5, 2.0, 2.0)
    with Timer() as clock:
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            sol = solve_dual(grid, weights, params, thresholds=th)
    d1 = th.delta1(params.lam)
    plus, minus = sol.plus, sol.minus
    ok = (
        sol.complete
        and max(plus.pde_residual_riesz_norm, minus.pde_residual_riesz_norm) <= 1e-8
        and plus.J_value < 0 < d1 <= minus.J_value
        and min(plus.interior_min, minus.interior_min) > 0
        and sol.separation > 1e-3
        and clock.elapsed <= budget
    )
    report(number, title, ok,
           f"J+ {plus.J_value:.4g}, J- {minus.J_value:.4g}, delta1 {d1:.4g}, "
           f"grad {max(plus.pde_residual_riesz_norm, minus.pde_residual_riesz_norm):.1e}, "
           f"min {min(plus.interior_min, minus.interior_min):.2e}, sep {sol.separation:.3f}, {clock.elapsed:.2f}s")
    return ok, sol, params


@pytest.fixture(scope="module")
def symmetric_run(thresholds_201):
    grid = Grid(1, 201)
    return _dual_check(8, "two positive solutions, constant weights", unit_weights(grid), thresholds_201, 60)


def test_08_two_solutions(symmetric_run):
    assert symmetric_run[0]


def test_09_sign_changing_weight():
    grid = Grid(1, 201)
    x = grid.coordinates[0]
    weights = Weights(np.sin(2 * np.pi * x), np.ones_like(x))
    th = compute_thresholds(grid, weights, 1.5, 2.0, 2.0)
    ok, _, _ = _dual_check(9, "two positive solutions, sign-changing a", weights, th, 120)
    assert ok


def test_10_scalar_reduction(symmetric_run):
    _, sol, params = symmetric_run
    grid = Grid(1, 201)
    ones = np.ones(grid.node_count)
    diffs = []
    for rep, branch in ((sol.plus, "plus"), (sol.minus, "minus")):
        u = oracle.scalar_reduction_solve(grid, ones, ones / 2, params, branch=branch)
        diffs += [np.max(np.abs(rep.state.u - u)), np.max(np.abs(rep.state.v - u))]
    gap = max(r.uv_gap for rep in (sol.plus, sol.minus) for r in rep.history)
    ok = max(diffs) <= 1e-6 and gap <= 1e-8
    report(10, "symmetric system vs scalar reduction", ok, f"max diff {max(diffs):.2e}, uv gap {gap:.2e}")
    assert ok


def test_11_embedding_and_poisson():
    S2 = estimate_sobolev_constant(Grid(1, 400), 2)
    grid = Grid(1, 199)
    peak = riesz_solve(grid, np.ones(grid.node_count), 1e-12).max()
    e1 = abs(S2 - 1 / np.pi) * np.pi
    ok = e1 <= 0.01 and abs(peak - 0.125) <= 1e-4
    report(11, "embedding constant and Poisson peak", ok, f"S2 {S2:.6f} (rel {e1:.1e}), peak {peak:.6f}")
    assert ok


ACCEPTANCE_CFG = """
dimension = 1
n = 201
weight_a = const:1
weight_b = const:1
q = 1.5
alpha = 2
beta = 2
lambda_fraction = 0.5
sweep_fractions = 0.1, 0.5, 0.9
seed = 0
"""


def test_12_determinism(tmp_path):
    cfg = tmp_path / "acceptance.cfg"
    cfg.write_text(ACCEPTANCE_CFG)
    mismatched = []
    statuses = []
    for command in ("solve", "sweep"):
        outs = [tmp_path / f"{command}_{k}" for k in range(2)]
        for out in outs:
            statuses.append(main([command, "--config", str(cfg), "--out", str(out)]))
        names = sorted(p.name for p in outs[0].iterdir())
        _, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], names, shallow=False)
        mismatched += mismatch + errors
    ok = not mismatched and statuses == [0, 0, 0, 0]
    report(12, "byte-identical solve and sweep outputs", ok, f"mismatched files {mismatched}, exit {statuses}")
    assert ok
