import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nehari import oracle
from nehari.energy import IntegralTriple, Params, Weights, integral_triple, nehari_constraint
from nehari.fibering import (
    BranchError,
    FiberingCase,
    NehariClass,
    classify_and_roots,
    m_peak,
    m_prime,
    m_value,
    on_manifold_forms,
    phi,
    phi_prime,
    phi_second,
    phi_second_on_manifold,
    project_to_nehari,
)
from nehari.grid import Grid, StatePair
from nehari.verification import random_state

from .conftest import unit_weights

P03 = Params(0.3, 1.5, 2.0, 2.0)
ONES = IntegralTriple(1.0, 1.0, 1.0)


def oracle_roots_s_minus_s5(c):
    """Roots of s - s⁵ = c (s = √t), by bisection on either side of the peak s = 5^(-1/4)."""
    peak = 5 ** -0.25
    f = lambda s: s - s**5 - c
    return oracle.bisect_root(f, 1e-12, peak) ** 2, oracle.bisect_root(f, peak, 1.0) ** 2


def test_phi_examples():
    assert phi(0.0, ONES, P03) == 0.0
    expected = 2 - 0.3 * 2**1.5 / 1.5 - 4
    assert phi(2.0, ONES, P03) == pytest.approx(expected, rel=1e-14)
    assert phi(2.0, ONES, P03) == pytest.approx(-2.565685, abs=1e-6)


def test_phi_prime_root_and_second():
    tr = IntegralTriple(1.0, 0.0, 1.0)
    assert phi_prime(1.0, tr, P03) == 0.0
    assert oracle.bisect_root(lambda t: phi_prime(t, tr, P03), 0.5, 2.0) == pytest.approx(1.0, rel=1e-14)
    assert phi_second(1.0, tr, P03) == -2.0
    assert phi_second(1.0, tr, P03) == pytest.approx(
        oracle.fd_derivative(lambda t: phi_prime(t, tr, P03), 1.0, 1e-5), rel=1e-8)
    flat = IntegralTriple(3.0, 0.0, 0.0)
    assert all(phi_second(t, flat, P03) == 3.0 for t in (0.1, 1.0, 7.0))


triples = st.builds(
    IntegralTriple,
    st.floats(0.01, 100),
    st.floats(-100, 100),
    st.floats(-100, 100),
)
params = st.builds(Params, st.floats(0.01, 10), st.floats(1.01, 1.99), st.floats(1.01, 4), st.floats(1.01, 4))


@settings(max_examples=300, deadline=None)
@given(triples, params, st.floats(1e-3, 1e3))
def test_master_identity(tr, p, t):
    lhs = phi_prime(t, tr, p)
    rhs = t ** (p.q - 1) * (m_value(t, tr, p) - p.lam * tr.A)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(t * tr.G), abs(t ** (p.p - 1) * tr.B))


@settings(max_examples=200, deadline=None)
@given(triples, params, st.floats(0.2, 3.0))
def test_derivative_chain(tr, p, t):
    d1 = oracle.fd_derivative(lambda s: oracle.raw_phi(s, *tr, p.lam, p.q, p.p), t, 1e-5)
    d2 = oracle.fd_derivative(lambda s: phi_prime(s, tr, p), t, 1e-5)
    scale1 = abs(t * tr.G) + abs(p.lam * t ** (p.q - 1) * tr.A) + abs(t ** (p.p - 1) * tr.B)
    scale2 = abs(tr.G) + abs(p.lam * t ** (p.q - 2) * tr.A) + abs(p.p * t ** (p.p - 2) * tr.B)
    assert abs(phi_prime(t, tr, p) - d1) <= 1e-6 * scale1
    assert abs(phi_second(t, tr, p) - d2) <= 1e-6 * scale2


def test_m_prime_matches_fd():
    for t in (0.1, 0.5, 2.0):
        assert m_prime(t, ONES, P03) == pytest.approx(
            oracle.fd_derivative(lambda s: m_value(s, ONES, P03), t, 1e-6), rel=1e-8)


def test_m_peak_example():
    assert m_value(1.0, ONES, P03) == 0.0
    t_star, peak = m_peak(ONES, P03)
    t_gold, peak_gold = oracle.golden_max(lambda t: m_value(t, ONES, P03), 0.01, 1.0)
    assert t_star == pytest.approx(math.sqrt(0.2), rel=1e-14)
    assert t_star == pytest.approx(t_gold, rel=1e-6)
    assert peak == pytest.approx(peak_gold, rel=1e-12)
    assert peak == pytest.approx(0.53499, abs=1e-5)


def test_on_manifold_forms_agree(rng):
    for _ in range(200):
        G, A, lam = rng.uniform(0.1, 10), rng.uniform(-5, 5), rng.uniform(0.1, 3)
        p = Params(lam, rng.uniform(1.1, 1.9), rng.uniform(1.1, 3), rng.uniform(1.1, 3))
        tr = IntegralTriple(G, A, G - lam * A)
        f1, f2 = on_manifold_forms(tr, p)
        mag = max(G, lam * abs(A), abs(tr.B))
        assert abs(f1 - f2) <= 1e-12 * (p.p - p.q) * mag
        assert phi_second_on_manifold(tr, p) == pytest.approx(phi_second(1.0, tr, p), rel=1e-12, abs=1e-12 * mag)
        if tr.B <= 0:
            assert f1 > 0


def test_on_manifold_requires_constraint():
    with pytest.raises(ValueError):
        phi_second_on_manifold(IntegralTriple(16, 1.5, 0.75), Params(1.0, 1.5, 2, 2))


def test_classify_quadrants():
    assert classify_and_roots(IntegralTriple(1, -1, -1), P03).case is FiberingCase.NO_CRITICAL_INCREASING
    assert classify_and_roots(IntegralTriple(1, -1, -1), P03).roots == []
    g = classify_and_roots(IntegralTriple(1, 1, -1), P03)
    assert g.case is FiberingCase.UNIQUE_MIN and [c for _, c in g.roots] == [NehariClass.PLUS]
    g = classify_and_roots(IntegralTriple(1, -1, 1), P03)
    assert g.case is FiberingCase.UNIQUE_MAX and [c for _, c in g.roots] == [NehariClass.MINUS]
    with pytest.raises(ValueError):
        classify_and_roots(IntegralTriple(0, 0, 0), P03)


def test_classify_two_roots_example():
    geom = classify_and_roots(ONES, P03)
    assert geom.case is FiberingCase.MIN_THEN_MAX
    (t1, c1), (t2, c2) = geom.roots
    e1, e2 = oracle_roots_s_minus_s5(0.3)
    assert (c1, c2) == (NehariClass.PLUS, NehariClass.MINUS)
    assert t1 == pytest.approx(e1, rel=1e-12) and t2 == pytest.approx(e2, rel=1e-12)
    assert t1 == pytest.approx(0.0915, abs=1e-4) and t2 == pytest.approx(0.81743, abs=1e-5)
    scan = oracle.scan_fibering(ONES, P03)
    assert [lo <= t <= hi for (lo, hi), t in zip(scan.sign_changes, (t1, t2))] == [True, True]


def test_classify_no_critical_decreasing():
    p = P03.with_lambda(0.6)
    geom = classify_and_roots(ONES, p)
    assert geom.case is FiberingCase.NO_CRITICAL_DECREASING and geom.roots == []
    assert oracle.scan_fibering(ONES, p).root_count == 0


def test_degenerate_band():
    _, peak = m_peak(ONES, P03)
    geom = classify_and_roots(ONES, P03.with_lambda(peak * (1 + 1e-12)))
    assert geom.degenerate and [c for _, c in geom.roots] == [NehariClass.ZERO]
    with pytest.raises(BranchError):
        geom.root_for(NehariClass.PLUS)


def test_ordering_of_monotonicity():
    (t1, _), (t2, _) = classify_and_roots(ONES, P03).roots
    ts = np.geomspace(1e-4, 10, 2000)
    d = np.array([phi_prime(t, ONES, P03) for t in ts])
    assert np.all(d[ts < t1 * 0.999] < 0)
    assert np.all(d[(ts > t1 * 1.001) & (ts < t2 * 0.999)] > 0)
    assert np.all(d[ts > t2 * 1.001] < 0)


def test_root_scaling_identity():
    """φ''(1) of the rescaled state equals t^(q+1) m'(t) at each root."""
    geom = classify_and_roots(ONES, P03)
    for t, _ in geom.roots:
        scaled = IntegralTriple(t**2, t**1.5, t**4)
        assert phi_second(1.0, scaled, P03) == pytest.approx(t**2.5 * m_prime(t, ONES, P03), rel=1e-10)


def test_project_examples(rng):
    g = Grid(1, 51)
    w, p = unit_weights(g), Params(1.0, 1.5, 2.0, 2.0)
    s = random_state(rng, g, "bump")
    proj = project_to_nehari(g, w, p, s, NehariClass.PLUS)
    assert abs(nehari_constraint(proj.triple, p)) <= 1e-10 * proj.triple.G
    assert proj.label is NehariClass.PLUS and phi_second(1.0, proj.triple, p) > 0
    again = project_to_nehari(g, w, p, proj.state, NehariClass.PLUS)
    assert again.t == pytest.approx(1.0, abs=1e-10)
    minus = project_to_nehari(g, w, p, s, NehariClass.MINUS)
    assert phi_second(1.0, minus.triple, p) < 0 and minus.t > proj.t


def test_project_wrong_branch():
    g = Grid(1, 21)
    w = Weights(np.ones(g.node_count), -np.ones(g.node_count))
    s = StatePair(g, np.ones(g.node_count), np.ones(g.node_count))
    with pytest.raises(BranchError, match="UniqueMin"):
        project_to_nehari(g, w, Params(1.0, 1.5, 2, 2), s, NehariClass.MINUS)


def test_project_matches_triple_example():
    """A grid state normalized to triple (1, 1, 1) projects onto the scalar example's roots."""
    g = Grid(1, 3)
    s = StatePair(g, np.ones(3), np.ones(3))
    s = s.scaled(1 / math.sqrt(integral_triple(g, unit_weights(g), P03, s).G))
    _, A, B = integral_triple(g, unit_weights(g), P03, s)
    w = Weights(np.full(3, 1 / A), np.full(3, 1 / B))
    assert integral_triple(g, w, P03, s) == pytest.approx((1.0, 1.0, 1.0), rel=1e-14)
    e1, e2 = oracle_roots_s_minus_s5(0.3)
    assert project_to_nehari(g, w, P03, s, NehariClass.PLUS).t == pytest.approx(e1, rel=1e-10)
    assert project_to_nehari(g, w, P03, s, NehariClass.MINUS).t == pytest.approx(e2, rel=1e-10)
