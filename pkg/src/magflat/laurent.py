"""Square matrices of finite Laurent series in d torus variables.

An entry is a sparse map ``{gamma: coefficient}`` standing for
``sum_gamma c_gamma exp(-i <gamma, k>)``.

Coefficients are held exactly as dyadic rationals: a pair of Python ints
``(re, im)`` with a matrix-wide binary scale, value ``(re + i im) / 2**shift``.
Every double is such a number, so sums and products of the input
coefficients are exact and only the final conversion back to floats rounds
(once, correctly). The float view prunes terms below ``PRUNE_REL`` times
the largest magnitude, so cancellations such as ``e^{-ia} + e^{-i(a+pi)}``
show up as structural zeros rather than rounding noise.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetError

PRUNE_REL = 1e-15

Index = tuple  # tuple[int, ...]


def _shift_of(x: float) -> int:
    den = x.as_integer_ratio()[1]
    return den.bit_length() - 1


def _to_float(num: int, shift: int) -> float:
    return num / (1 << shift) if shift >= 0 else float(num << -shift)


def dyadic_shift(values: Iterable[complex]) -> int:
    """Smallest binary scale at which every value has integer parts."""
    return max((max(_shift_of(c.real), _shift_of(c.imag)) for c in map(complex, values)), default=0)


def to_dyadic(c: complex, shift: int) -> tuple[int, int]:
    """Exact integer pair ``(re, im)`` with ``c == (re + i im) / 2**shift``."""
    c = complex(c)
    re_n, re_d = c.real.as_integer_ratio()
    im_n, im_d = c.imag.as_integer_ratio()
    return re_n * ((1 << shift) // re_d), im_n * ((1 << shift) // im_d)


def from_dyadic(re: int, im: int, shift: int) -> complex:
    return complex(_to_float(re, shift), _to_float(im, shift))


def prune(series: dict, cut: float) -> dict:
    return {g: c for g, c in series.items() if abs(c) > cut}


class LaurentMatrix:
    """Exact ``size x size`` Laurent matrix.

    ``exact[u][v]`` maps gamma to an integer pair; the common scale is
    ``2**-shift``. :attr:`entries` is the pruned float view.
    """

    def __init__(self, exact: list[list[dict]], shift: int, dimension: int):
        self.exact = exact
        self.shift = shift
        self.dimension = dimension
        self._entries = None

    @classmethod
    def from_terms(cls, size: int, dimension: int, terms: Iterable[tuple[int, int, Index, complex]]) -> "LaurentMatrix":
        """Sum ``(u, v, gamma, coefficient)`` terms exactly."""
        terms = [(u, v, tuple(g), complex(c)) for u, v, g, c in terms]
        shift = dyadic_shift(c for *_, c in terms)
        exact: list[list[dict]] = [[defaultdict(lambda: [0, 0]) for _ in range(size)] for _ in range(size)]
        for u, v, g, c in terms:
            acc = exact[u][v][g]
            re, im = to_dyadic(c, shift)
            acc[0] += re
            acc[1] += im
        out = [[{g: tuple(p) for g, p in e.items() if p[0] or p[1]} for e in row] for row in exact]
        return cls(out, shift, dimension)

    @property
    def size(self) -> int:
        return len(self.exact)

    def _series(self, e: dict) -> dict:
        return {g: from_dyadic(re, im, self.shift) for g, (re, im) in e.items()}

    @property
    def entries(self) -> list[list[dict]]:
        if self._entries is None:
            raw = [[self._series(e) for e in row] for row in self.exact]
            top = max((abs(c) for row in raw for e in row for c in e.values()), default=0.0)
            self._entries = [[prune(e, PRUNE_REL * top) for e in row] for row in raw]
        return self._entries

    def __getitem__(self, uv: tuple[int, int]) -> dict:
        u, v = uv
        return self.entries[u][v]

    def support_size(self) -> int:
        return sum(len(e) for row in self.exact for e in row)

    def max_abs(self) -> float:
        return max((abs(c) for row in self.entries for e in row for c in e.values()), default=0.0)

    def matmul(self, other: "LaurentMatrix", budget: int | None = None) -> "LaurentMatrix":
        n = self.size
        out = []
        total = 0
        for u in range(n):
            row = []
            for w in range(n):
                acc: dict = defaultdict(lambda: [0, 0])
                for v in range(n):
                    a, b = self.exact[u][v], other.exact[v][w]
                    if not a or not b:
                        continue
                    for ga, (ar, ai) in a.items():
                        for gb, (br, bi) in b.items():
                            slot = acc[tuple(x + y for x, y in zip(ga, gb))]
                            slot[0] += ar * br - ai * bi
                            slot[1] += ar * bi + ai * br
                cell = {g: (p[0], p[1]) for g, p in acc.items() if p[0] or p[1]}
                total += len(cell)
                if budget is not None and total > budget:
                    raise BudgetError(f"Laurent product support exceeds budget of {budget} coefficients")
                row.append(cell)
            out.append(row)
        return LaurentMatrix(out, self.shift + other.shift, self.dimension)

    __matmul__ = matmul

    def trace(self) -> dict:
        """Pruned float series of the trace (pruning relative to the whole matrix)."""
        acc: dict = defaultdict(lambda: [0, 0])
        for v in range(self.size):
            for g, (re, im) in self.exact[v][v].items():
                acc[g][0] += re
                acc[g][1] += im
        tr = {g: from_dyadic(re, im, self.shift) for g, (re, im) in acc.items()}
        top = max(self.max_abs(), max((abs(c) for c in tr.values()), default=0.0))
        return prune(tr, PRUNE_REL * top)

    def evaluate(self, k: Sequence[float]) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        m = np.zeros((self.size, self.size), dtype=complex)
        for u, row in enumerate(self.entries):
            for v, e in enumerate(row):
                m[u, v] = sum(c * np.exp(-1j * float(np.dot(g, k))) for g, c in e.items())
        return m
