import cmath
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import doubled, ex2_graph, isolated, random_graph, square_lattice, zlattice
from magflat import bundled_graph
from magflat.errors import BudgetError
from magflat.fiber import build_fiber
from magflat.traces import (
    build_laurent_matrix,
    char_poly_from_traces,
    coefficients_by_enumeration,
    coefficients_csv,
    enumerate_cycles,
    fft_cross_check,
    flat_spectrum_verdict,
    fourier_coefficients_fft,
    parseval_check,
    reduce_flux,
    trace_fourier,
)

seeds = st.integers(0, 2**32 - 1)


def test_laurent_matrix_examples():
    assert build_laurent_matrix(ex2_graph()).entries == [
        [{(0,): 3 + 0j}, {(1,): -1 + 0j}],
        [{(-1,): -1 + 0j}, {(0,): 3 + 0j}],
    ]
    assert build_laurent_matrix(isolated(5.0)).entries == [[{(0,): 5 + 0j}]]
    assert build_laurent_matrix(zlattice()).entries == [[{(0,): 2 + 0j, (1,): -1 + 0j, (-1,): -1 + 0j}]]


def test_laurent_matrix_evaluates_to_fiber():
    g = random_graph(np.random.default_rng(5), nu_max=4)
    m = build_laurent_matrix(g)
    for k in np.random.default_rng(6).uniform(-np.pi, np.pi, size=(5, g.dimension)):
        assert np.allclose(m.evaluate(k), build_fiber(g, k).matrix, rtol=0, atol=1e-13)


def test_doubled_edges_leave_diagonal_only():
    g = bundled_graph("ex1")
    m = build_laurent_matrix(g)
    for u in range(g.nu):
        for v in range(g.nu):
            if u != v:
                assert m[u, v] == {}
    assert m[0, 0] == {(0,): 4 + 0j} and m[1, 1] == {(0,): 5 + 0j}


def test_matmul_budget():
    m = build_laurent_matrix(square_lattice())
    with pytest.raises(BudgetError):
        m.matmul(m, budget=3)


def test_trace_fourier_examples():
    s = trace_fourier(zlattice(), 2)
    assert s.coefficients[1] == {(0,): 2, (1,): -1, (-1,): -1}
    assert s.coefficients[2] == {(0,): 6, (1,): -4, (-1,): -4, (2,): 1, (-2,): 1}
    s = trace_fourier(ex2_graph(), 2)
    assert s.get(1, (0,)) == 6 and s.get(2, (0,)) == 20
    assert s.get(2, (1,)) == 0 and s.get(2, (-1,)) == 0
    # no loops and no potential: Tr H = sum of degrees
    g = ex2_graph()
    assert trace_fourier(g, 1).coefficients[1] == {(0,): sum(g.degrees())}


def test_trace_fourier_matches_fft_zlattice():
    fft = fourier_coefficients_fft(zlattice(), 2, 8)
    s = trace_fourier(zlattice(), 2)
    for gamma, c in fft.items():
        assert abs(c - s.get(2, gamma)) < 1e-12


def test_trace_fourier_limits():
    with pytest.raises(ValueError):
        trace_fourier(zlattice(), 0)
    with pytest.raises(BudgetError):
        trace_fourier(zlattice(), 13)
    assert trace_fourier(zlattice(), 13, n_cap=13).n_max == 13


def test_enumerate_cycles_zlattice():
    one = enumerate_cycles(zlattice(), 1, (0,))
    assert len(one) == 1 and one[0].weight == 2
    two = enumerate_cycles(zlattice(), 2, (0,))
    assert len(two) == 3
    assert sum(c.weight for c in two) == 6


def test_enumerate_cycles_example_two():
    a = math.pi / 4
    cycles = enumerate_cycles(ex2_graph(alpha_o=a), 2, (1,))
    assert len(cycles) == 4
    assert all(c.weight == 1 for c in cycles)
    fluxes = Counter(round(c.raw_flux, 12) for c in cycles)
    assert fluxes == Counter({round(-a, 12): 2, round(-math.pi - a, 12): 2})
    total = sum(c.weight * cmath.exp(-1j * c.raw_flux) for c in cycles)
    assert abs(total) < 1e-15


def test_enumerate_cycles_cap():
    with pytest.raises(BudgetError):
        enumerate_cycles(zlattice(), 9, (0,))
    with pytest.raises(ValueError):
        enumerate_cycles(zlattice(), 0, (0,))


@pytest.mark.parametrize(
    "x, expected",
    [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi, math.pi), (2 * math.pi + 0.5, 0.5), (-4.0, 2 * math.pi - 4.0)],
)
def test_reduce_flux(x, expected):
    assert reduce_flux(x) == pytest.approx(expected, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_cycle_reversal_bijection(seed):
    g = random_graph(np.random.default_rng(seed), nu_max=3, max_edges=4)
    gamma = tuple(int(x) for x in np.random.default_rng(seed + 1).integers(-1, 2, size=g.dimension))
    n = 3
    fwd = enumerate_cycles(g, n, gamma)
    back = enumerate_cycles(g, n, tuple(-x for x in gamma))
    assert len(fwd) == len(back)
    key = lambda cs, s: sorted((c.weight, round(s * c.raw_flux, 9)) for c in cs)
    assert key(fwd, 1) == key(back, -1)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_laurent_route_matches_enumeration_and_fft(seed):
    g = random_graph(np.random.default_rng(seed))
    s = trace_fourier(g, 4)
    for n in range(1, 5):
        enum = coefficients_by_enumeration(g, n)
        for gamma in set(enum) | set(s.coefficients[n]):
            assert abs(s.get(n, gamma) - enum.get(gamma, 0j)) <= 1e-12
    assert max(fft_cross_check(g, s, 17)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_support_bound_and_conjugate_symmetry(seed):
    g = random_graph(np.random.default_rng(seed), nu_max=5, max_edges=8)
    s = trace_fourier(g, 5)
    for n in range(1, 6):
        coeffs = s.coefficients[n]
        for gamma, c in coeffs.items():
            assert math.hypot(*gamma) <= n * g.tau_max + 1e-12
            assert abs(s.get(n, tuple(-x for x in gamma)) - c.conjugate()) <= 1e-12 * max(1.0, abs(c))


def test_fourier_coefficients_fft_isolated():
    assert fourier_coefficients_fft(isolated(5.0), 3, 4)[(0,)] == pytest.approx(125)


def test_verdict_examples():
    for g in (ex2_graph(), bundled_graph("ex1"), isolated(5.0)):
        v = flat_spectrum_verdict(trace_fourier(g, g.nu), g.nu)
        assert v.flat and v.label == "FLAT" and v.certificate is None
    v = flat_spectrum_verdict(trace_fourier(zlattice(), 1), 1)
    assert v.label == "AC_NONEMPTY" and v.certificate == (1, (-1,), -1)
    v = flat_spectrum_verdict(trace_fourier(square_lattice(), 1), 1)
    assert v.certificate == (1, (-1, 0), -1)
    with pytest.raises(ValueError):
        flat_spectrum_verdict(trace_fourier(ex2_graph(), 1), 2)


def test_verdict_zero_field_example_two():
    v = flat_spectrum_verdict(trace_fourier(ex2_graph(field=False), 2), 2)
    assert not v.flat
    n, gamma, c = v.certificate
    assert n == 1 or (n == 2 and gamma == (-1,))


def test_parseval_examples():
    rows = parseval_check(zlattice(), trace_fourier(zlattice(), 1))
    assert rows[0].grid_mean_sq == pytest.approx(6) and rows[0].coeff_sq_sum == pytest.approx(6)
    assert rows[0].zero_sq == pytest.approx(4) and not rows[0].flat_identity
    rows = parseval_check(isolated(5.0), trace_fourier(isolated(5.0), 2))
    assert rows[1].grid_mean_sq == pytest.approx(625) and rows[1].flat_identity
    rows = parseval_check(ex2_graph(), trace_fourier(ex2_graph(), 2))
    assert [r.grid_mean_sq for r in rows] == pytest.approx([36, 400])
    assert all(r.flat_identity and r.residual < 1e-9 for r in rows)


def test_parseval_coarse_grid_warns():
    s = trace_fourier(zlattice(), 3)
    with pytest.warns(UserWarning):
        parseval_check(zlattice(), s, grid=3)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_parseval_random(seed):
    g = random_graph(np.random.default_rng(seed), nu_max=3, d_max=2, max_edges=5)
    for r in parseval_check(g, trace_fourier(g, 3)):
        assert r.residual <= 1e-9 * max(1.0, r.grid_mean_sq)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_doubled_graph_verdict_flat(seed):
    rng = np.random.default_rng(seed)
    g = doubled(random_graph(rng, nu_max=3, max_edges=3), rng)
    assert flat_spectrum_verdict(trace_fourier(g, g.nu), g.nu).flat


@pytest.mark.parametrize(
    "traces, expected",
    [([5.0], [-5.0]), ([6.0, 20.0], [-6.0, 8.0]), ([0.0, 2.0], [0.0, -1.0])],
)
def test_char_poly_examples(traces, expected):
    assert char_poly_from_traces(traces) == pytest.approx(expected)


def test_char_poly_against_numpy():
    rng = np.random.default_rng(9)
    for _ in range(10):
        ev = rng.uniform(-3, 3, size=4)
        traces = [float(np.sum(ev**n)) for n in range(1, 5)]
        assert char_poly_from_traces(traces) == pytest.approx(np.poly(ev)[1:], abs=1e-10)


def test_coefficients_csv():
    text = coefficients_csv(trace_fourier(ex2_graph(), 2))
    lines = text.splitlines()
    assert lines[0] == "n,gamma_1,re,im"
    assert "1,0,6,0" in lines
    assert "2,1,0,0" in lines and "2,-1,0,0" in lines
    assert "2,0,20,0" in lines
    assert lines[1:] == sorted(lines[1:], key=lambda r: tuple(int(x) for x in r.split(",")[:2]))
