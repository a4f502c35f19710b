"""Fourier coefficients of Tr H^n(k) and the exact flat-spectrum test.

The coefficients are read off from powers of a Laurent matrix built on the
modified fundamental graph (one extra loop of weight ``kappa_v + Q(v)`` per
vertex, real edges of weight -1). Explicit cycle enumeration computes the
same numbers from the definition and is kept as a brute-force oracle.
"""

from __future__ import annotations

import io
import itertools
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .bands import KGrid
from .errors import BudgetError, NumericError
from .fiber import fiber_matrices
from .graph import FundamentalGraph
from .laurent import LaurentMatrix, dyadic_shift, from_dyadic, to_dyadic

DEFAULT_COEFF_TOL = 1e-9
DEFAULT_N_CAP = 12
DEFAULT_CYCLE_CAP = 8
DEFAULT_COEFF_BUDGET = 2_000_000

Index = tuple  # tuple[int, ...]


# -- modified graph -----------------------------------------------------------

@dataclass(frozen=True)
class ModArc:
    tail: int
    head: int
    tau: tuple[int, ...]
    alpha: float
    weight: float
    added: bool  # the extra per-vertex loop


@dataclass(frozen=True)
class ModifiedGraph:
    base: FundamentalGraph
    arcs: tuple[ModArc, ...]

    @property
    def added_loops(self) -> list[ModArc]:
        return [a for a in self.arcs if a.added]

    def out_arcs(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.base.nu)]
        for i, a in enumerate(self.arcs):
            out[a.tail].append(i)
        return out


def modified_graph(g: FundamentalGraph) -> ModifiedGraph:
    q = np.array(g.degrees(), dtype=float) + np.array(g.potential)
    zero = (0,) * g.dimension
    arcs = [ModArc(a.tail, a.head, a.tau, a.alpha, -1.0, False) for a in g.arcs()]
    arcs += [ModArc(v, v, zero, 0.0, float(q[v]), True) for v in range(g.nu)]
    return ModifiedGraph(g, tuple(arcs))


def arc_coefficient(a: ModArc) -> complex:
    """``weight * exp(-i alpha)`` of one arc, rounded once per part."""
    return complex(a.weight * math.cos(a.alpha), -a.weight * math.sin(a.alpha))


def build_laurent_matrix(g: FundamentalGraph) -> LaurentMatrix:
    """Laurent matrix whose value at k is the fiber matrix H(k)."""
    terms = [(a.tail, a.head, a.tau, arc_coefficient(a)) for a in modified_graph(g).arcs]
    return LaurentMatrix.from_terms(g.nu, g.dimension, terms)


# -- trace series -------------------------------------------------------------

@dataclass
class IndexedTraceSeries:
    """Sparse map ``(n, gamma) -> h_hat`` for ``1 <= n <= n_max``."""

    n_max: int
    dimension: int
    tau_max: float
    coefficients: dict = field(default_factory=dict)  # n -> {gamma: complex}

    def get(self, n: int, gamma: Sequence[int]) -> complex:
        if not 1 <= n <= self.n_max:
            raise KeyError(f"n={n} outside 1..{self.n_max}")
        return self.coefficients[n].get(tuple(gamma), 0j)

    def support(self, n: int) -> list[Index]:
        return sorted(self.coefficients[n])

    def evaluate(self, n: int, ks: np.ndarray) -> np.ndarray:
        """``sum_gamma h_hat[n, gamma] exp(-i <gamma, k>)`` at each row of ``ks``."""
        ks = np.atleast_2d(np.asarray(ks, dtype=float))
        out = np.zeros(len(ks), dtype=complex)
        for gamma, c in self.coefficients[n].items():
            out += c * np.exp(-1j * (ks @ np.asarray(gamma, dtype=float)))
        return out


def trace_fourier(
    g: FundamentalGraph,
    n_max: int,
    n_cap: int = DEFAULT_N_CAP,
    budget: int = DEFAULT_COEFF_BUDGET,
) -> IndexedTraceSeries:
    """Fourier coefficients of Tr H^n(k) for n = 1..n_max via Laurent powers."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max > n_cap:
        raise BudgetError(f"n_max={n_max} exceeds the configured cap {n_cap}")
    m = build_laurent_matrix(g)
    series = IndexedTraceSeries(n_max, g.dimension, g.tau_max)
    power = m
    for n in range(1, n_max + 1):
        if n > 1:
            power = power.matmul(m, budget=budget)
        series.coefficients[n] = power.trace()
    return series


# -- cycle enumeration (oracle) -----------------------------------------------

def reduce_flux(x: float) -> float:
    """Representative of ``x`` mod 2 pi in [-pi, pi]; -pi is reported as pi."""
    r = math.remainder(x, 2 * math.pi)
    return math.pi if r == -math.pi else r


@dataclass(frozen=True)
class Cycle:
    arcs: tuple[int, ...]      # positions in ModifiedGraph.arcs
    start: int
    index: tuple[int, ...]
    weight: float
    raw_flux: float            # unreduced sum of phases
    flux: float                # reduced to [-pi, pi]


def iter_cycles(mg: ModifiedGraph, n: int) -> Iterator[Cycle]:
    """All closed arc sequences of length ``n``; rotations are distinct cycles."""
    out = mg.out_arcs()
    arcs = mg.arcs
    d = mg.base.dimension

    def walk(start, v, depth, seq, idx, w, phi):
        if depth == n:
            if v == start:
                yield Cycle(tuple(seq), start, idx, w, phi, reduce_flux(phi))
            return
        for i in out[v]:
            a = arcs[i]
            seq.append(i)
            yield from walk(start, a.head, depth + 1, seq,
                            tuple(x + y for x, y in zip(idx, a.tau)), w * a.weight, phi + a.alpha)
            seq.pop()

    for s in range(mg.base.nu):
        yield from walk(s, s, 0, [], (0,) * d, 1.0, 0.0)


def enumerate_cycles(
    g: FundamentalGraph | ModifiedGraph,
    n: int,
    gamma: Sequence[int],
    cap: int = DEFAULT_CYCLE_CAP,
) -> list[Cycle]:
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise BudgetError(f"cycle length {n} exceeds enumeration cap {cap}")
    mg = g if isinstance(g, ModifiedGraph) else modified_graph(g)
    gamma = tuple(gamma)
    return [c for c in iter_cycles(mg, n) if c.index == gamma]


def coefficients_by_enumeration(g: FundamentalGraph, n: int, cap: int = DEFAULT_CYCLE_CAP) -> dict:
    """``{gamma: sum over cycles of weight * exp(-i flux)}`` straight from the definition.

    ``exp(-i flux)`` is taken as the product of the per-arc factors, and the
    sum over cycles is carried out exactly before a single rounding.
    """
    if n > cap:
        raise BudgetError(f"cycle length {n} exceeds enumeration cap {cap}")
    mg = modified_graph(g)
    coeffs = [arc_coefficient(a) for a in mg.arcs]
    shift = dyadic_shift(coeffs)
    exact = [to_dyadic(c, shift) for c in coeffs]
    acc: dict = defaultdict(lambda: [0, 0])
    for c in iter_cycles(mg, n):
        re, im = 1, 0
        for i in c.arcs:
            br, bi = exact[i]
            re, im = re * br - im * bi, re * bi + im * br
        slot = acc[c.index]
        slot[0] += re
        slot[1] += im
    return {gm: from_dyadic(re, im, n * shift) for gm, (re, im) in acc.items()}


def fourier_coefficients_fft(g: FundamentalGraph, n: int, resolution: int) -> dict:
    """Coefficients of Tr H^n(k) from an FFT of grid samples.

    Exact when ``resolution`` exceeds twice the largest |gamma_i| in the support.
    """
    grid = KGrid(resolution, g.dimension)
    t = trace_powers(g, grid.points, n)[:, n - 1].reshape((resolution,) * g.dimension)
    f = np.fft.fftn(t) / grid.size
    half = resolution // 2
    out = {}
    for gamma in itertools.product(range(-half, resolution - half), repeat=g.dimension):
        out[gamma] = complex(f[tuple((-x) % resolution for x in gamma)])
    return out


# -- flat spectrum criteria -----------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    flat: bool
    certificate: Optional[tuple[int, tuple[int, ...], complex]] = None

    @property
    def label(self) -> str:
        return "FLAT" if self.flat else "AC_NONEMPTY"


def flat_spectrum_verdict(series: IndexedTraceSeries, nu: int, tol: float = DEFAULT_COEFF_TOL) -> Verdict:
    """Flat iff every coefficient with n <= nu and gamma != 0 vanishes.

    Otherwise the certificate is the first offending ``(n, gamma, h_hat)``
    with n ascending, then gamma in lexicographic order.
    """
    if series.n_max < nu:
        raise ValueError(f"series covers n <= {series.n_max}, need n <= {nu}")
    zero = (0,) * series.dimension
    for n in range(1, nu + 1):
        for gamma in sorted(series.coefficients[n]):
            c = series.coefficients[n][gamma]
            if gamma != zero and abs(c) > tol:
                return Verdict(False, (n, gamma, c))
    return Verdict(True)


def trace_powers(g: FundamentalGraph, ks: np.ndarray, n_max: int) -> np.ndarray:
    """Real traces Tr H^n(k), shape ``(len(ks), n_max)``."""
    mats = fiber_matrices(g, ks)
    out = np.empty((mats.shape[0], n_max))
    p = mats
    norms = np.linalg.norm(mats, ord=2, axis=(1, 2))
    for n in range(1, n_max + 1):
        if n > 1:
            p = p @ mats
        tr = np.trace(p, axis1=1, axis2=2)
        if np.any(np.abs(tr.imag) > 1e-10 * norms**n + 1e-300):
            raise NumericError(f"Tr H^{n} has a non-negligible imaginary part")
        out[:, n - 1] = tr.real
    return out


def required_resolution(series: IndexedTraceSeries) -> int:
    return int(math.ceil(2 * series.n_max * series.tau_max)) + 1


@dataclass(frozen=True)
class ParsevalRow:
    n: int
    grid_mean_sq: float        # grid average of (Tr H^n)^2
    coeff_sq_sum: float        # sum over gamma of |h_hat|^2
    zero_sq: float             # |h_hat[n, 0]|^2
    residual: float            # |grid_mean_sq - coeff_sq_sum|
    flat_identity: bool        # grid_mean_sq == zero_sq within tolerance


def parseval_check(
    g: FundamentalGraph,
    series: IndexedTraceSeries,
    grid: KGrid | int | None = None,
    rel_tol: float = 1e-9,
) -> list[ParsevalRow]:
    need = required_resolution(series)
    if grid is None:
        grid = KGrid(need, g.dimension)
    elif isinstance(grid, int):
        grid = KGrid(grid, g.dimension)
    if grid.resolution < need:
        warnings.warn(f"grid resolution {grid.resolution} < {need}; quadrature is not exact", stacklevel=2)
    traces = trace_powers(g, grid.points, series.n_max)
    zero = (0,) * g.dimension
    rows = []
    for n in range(1, series.n_max + 1):
        mean_sq = float(np.mean(traces[:, n - 1] ** 2))
        coeffs = series.coefficients[n]
        total = math.fsum(abs(c) ** 2 for c in coeffs.values())
        z = abs(coeffs.get(zero, 0j)) ** 2
        scale = max(1.0, mean_sq)
        rows.append(ParsevalRow(n, mean_sq, total, z, abs(mean_sq - total), abs(mean_sq - z) <= rel_tol * scale))
    return rows


def fft_cross_check(g: FundamentalGraph, series: IndexedTraceSeries, grid: KGrid | int) -> list[float]:
    """Per n, the largest relative gap between the series and direct traces on the grid."""
    if isinstance(grid, int):
        grid = KGrid(grid, g.dimension)
    pts = grid.points
    traces = trace_powers(g, pts, series.n_max)
    errs = []
    for n in range(1, series.n_max + 1):
        approx = series.evaluate(n, pts)
        direct = traces[:, n - 1]
        scale = max(1.0, float(np.max(np.abs(direct))))
        errs.append(float(np.max(np.abs(approx - direct))) / scale)
    return errs


def char_poly_from_traces(traces: Sequence[float]) -> list[float]:
    """Coefficients xi_1..xi_nu of lambda^nu + xi_1 lambda^(nu-1) + ... from power sums."""
    xi: list = []
    for n in range(1, len(traces) + 1):
        s = traces[n - 1] + sum(traces[n - j - 1] * xi[j - 1] for j in range(1, n))
        xi.append(-s / n)
    return xi


# -- export ---------------------------------------------------------------------

def lattice_ball(dimension: int, radius: float) -> list[Index]:
    r = int(math.floor(radius + 1e-9))
    pts = itertools.product(range(-r, r + 1), repeat=dimension)
    return [p for p in pts if math.hypot(*p) <= radius + 1e-9]


def _fmt(x: float) -> str:
    return format(x + 0.0, ".17g")


def coefficients_csv(series: IndexedTraceSeries) -> str:
    """Rows ``n, gamma_1..gamma_d, Re, Im`` over the whole support ball, zeros included."""
    buf = io.StringIO()
    d = series.dimension
    buf.write(",".join(["n", *(f"gamma_{i + 1}" for i in range(d)), "re", "im"]) + "\n")
    for n in range(1, series.n_max + 1):
        coeffs = series.coefficients[n]
        keys = set(lattice_ball(d, n * series.tau_max)) | set(coeffs)
        for gamma in sorted(keys):
            c = coeffs.get(gamma, 0j)
            buf.write(",".join([str(n), *map(str, gamma), _fmt(c.real), _fmt(c.imag)]) + "\n")
    return buf.getvalue()
