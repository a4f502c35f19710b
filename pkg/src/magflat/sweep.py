"""Coupling-constant sweep over the family of potentials ``t * alpha``.

At t = 0 some trace coefficient ``h_hat[n, gamma]`` with gamma != 0 is
nonzero. Along the family it becomes the exponential polynomial
``f(t) = sum_c w(c) exp(-i t flux(c))`` over cycles of that class, so the
spectrum can only be flat where f vanishes. Each zero is a candidate that
is then checked with the full coefficient criterion.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import NumericError
from .graph import FundamentalGraph
from .traces import (
    DEFAULT_COEFF_TOL,
    DEFAULT_CYCLE_CAP,
    IndexedTraceSeries,
    Verdict,
    enumerate_cycles,
    flat_spectrum_verdict,
    trace_fourier,
)

DEFAULT_SAMPLES = 4096
FREQ_GAP = 1e-12
_INV_PHI = (math.sqrt(5) - 1) / 2


class NoWitnessError(NumericError):
    """No nonzero coefficient with gamma != 0 exists (the zero-field operator looks flat)."""


class IdenticallyZeroError(NumericError):
    """The exponential polynomial vanishes identically."""


@dataclass(frozen=True)
class ExponentialPolynomial:
    """``f(t) = sum_j w_j exp(-i t phi_j)`` with pairwise distinct frequencies ``phi_j``."""

    terms: tuple[tuple[complex, float], ...]

    @classmethod
    def from_terms(cls, terms: Sequence[tuple[complex, float]]) -> "ExponentialPolynomial":
        merged: list[list] = []
        for w, phi in sorted(terms, key=lambda wt: wt[1]):
            if merged and phi - merged[-1][1] <= FREQ_GAP * max(1.0, abs(phi)):
                merged[-1][0].append(w)
            else:
                merged.append([[w], phi])
        out = []
        for ws, phi in merged:
            w = complex(math.fsum(x.real for x in map(complex, ws)), math.fsum(x.imag for x in map(complex, ws)))
            out.append((w, phi))
        return cls(tuple(out))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for w, phi in self.terms:
            out = out + w * np.exp(-1j * t * phi)
        return out if out.ndim else complex(out)

    @property
    def weight_sum(self) -> float:
        return sum(abs(w) for w, _ in self.terms)

    def _live(self) -> list[tuple[complex, float]]:
        cut = 1e-15 * max(self.weight_sum, 1e-300)
        return [(w, phi) for w, phi in self.terms if abs(w) > cut]

    @property
    def is_zero(self) -> bool:
        return not self._live()

    @property
    def is_constant_modulus(self) -> bool:
        """At most one frequency survives, so |f| does not depend on t."""
        return len(self._live()) <= 1

    def scaled(self, s: float) -> "ExponentialPolynomial":
        return ExponentialPolynomial(tuple((w, s * phi) for w, phi in self.terms))


def select_witness(series0: IndexedTraceSeries, nu: int, tol: float = DEFAULT_COEFF_TOL) -> tuple[int, tuple[int, ...]]:
    """Smallest ``(n, gamma)``, gamma != 0, with a nonzero zero-field coefficient."""
    v = flat_spectrum_verdict(series0, nu, tol)
    if v.flat:
        raise NoWitnessError(
            "all coefficients with gamma != 0 vanish at zero field; "
            "the periodic cover is probably disconnected"
        )
    n, gamma, _ = v.certificate
    return n, gamma


def build_f(g: FundamentalGraph, n: int, gamma: Sequence[int], cap: int = DEFAULT_CYCLE_CAP) -> ExponentialPolynomial:
    gamma = tuple(gamma)
    if not any(gamma):
        raise ValueError("witness index gamma must be nonzero")
    cycles = enumerate_cycles(g, n, gamma, cap=cap)
    # unreduced fluxes: scaling by t does not commute with reduction mod 2 pi
    return ExponentialPolynomial.from_terms([(complex(c.weight), c.raw_flux) for c in cycles])


def _golden_min(fn, a: float, b: float, width: float) -> float:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    return (a + b) / 2


def find_zeros(f: ExponentialPolynomial, t_min: float, t_max: float, samples: int = DEFAULT_SAMPLES) -> list[float]:
    """Zeros of ``f`` on ``[t_min, t_max]``.

    ``|f|^2`` is sampled uniformly; every local minimum below
    ``1e-6 * (sum |w|)^2`` is refined by golden-section search down to a
    bracket of 1e-12 and kept when ``|f| <= 1e-9 * sum |w|``. Zeros closer
    than one sample spacing are merged. Raises :class:`IdenticallyZeroError`
    when f vanishes identically; returns ``[]`` when |f| is constant.
    """
    if not t_max > t_min:
        raise ValueError("need t_max > t_min")
    if samples < 16:
        raise ValueError("need at least 16 samples")
    if f.is_zero:
        raise IdenticallyZeroError("f vanishes identically; choose another witness")
    if f.is_constant_modulus:
        return []
    scale = f.weight_sum
    ts = np.linspace(t_min, t_max, samples)
    p = np.abs(f(ts)) ** 2
    h = ts[1] - ts[0]

    def sq(t):
        return abs(f(t)) ** 2

    zeros: list[float] = []
    for i in range(samples):
        left = p[i - 1] if i > 0 else math.inf
        right = p[i + 1] if i < samples - 1 else math.inf
        if not (p[i] <= left and p[i] < right) or p[i] > 1e-6 * scale**2:
            continue
        a, b = max(t_min, ts[i] - h), min(t_max, ts[i] + h)
        t = _golden_min(sq, a, b, 1e-12)
        best = min((t, ts[i], a, b), key=sq)
        if abs(f(best)) <= 1e-9 * scale:
            if zeros and best - zeros[-1] <= h:
                if sq(best) < sq(zeros[-1]):
                    zeros[-1] = best
            else:
                zeros.append(float(best))
    return zeros


@dataclass
class SweepReport:
    witness: tuple[int, tuple[int, ...]]
    t_interval: tuple[float, float]
    f: ExponentialPolynomial
    zeros: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)   # Verdict per zero
    residuals: list = field(default_factory=list)  # |f(t)| per zero
    constant_flag: bool = False

    @property
    def flat_couplings(self) -> list[float]:
        return [t for t, v in zip(self.zeros, self.verdicts) if v.flat]

    def summary(self) -> str:
        a, b = self.t_interval
        n, gamma = self.witness
        lines = [
            f"witness: n={n} gamma={list(gamma)} f(0)={_g6(self.f(0.0))}",
            f"terms: {len(self.f.terms)}" + (" (|f| constant)" if self.constant_flag else ""),
        ]
        if not self.zeros:
            lines.append(f"a.c. spectrum nonempty for all t in [{_g6(a)},{_g6(b)}]")
        else:
            for t, v, r in zip(self.zeros, self.verdicts, self.residuals):
                lines.append(f"candidate t={_g6(t)}: {v.label} (|f|={r:.3g})")
            lines.append(f"a.c. spectrum nonempty for all other t in [{_g6(a)},{_g6(b)}]")
        if a < 0 or b > 1:
            lines.append("note: the finiteness statement is usually stated for t in [0,1]; it holds on any bounded interval")
        lines.append("no claim is made for t outside the interval")
        return "\n".join(lines) + "\n"

    def csv(self) -> str:
        n, gamma = self.witness
        buf = io.StringIO()
        buf.write(",".join(["t_zero", "verdict", "n", *(f"gamma_{i + 1}" for i in range(len(gamma))), "abs_f"]) + "\n")
        for t, v, r in zip(self.zeros, self.verdicts, self.residuals):
            buf.write(",".join([format(t, ".17g"), v.label, str(n), *map(str, gamma), format(r, ".17g")]) + "\n")
        return buf.getvalue()


def _g6(x) -> str:
    if isinstance(x, complex):
        if abs(x.imag) <= 1e-12 * max(1.0, abs(x.real)):
            x = x.real
        else:
            return f"{x.real:.6g}{x.imag:+.6g}j"
    return format(x + 0.0, ".6g")


def sweep(
    g: FundamentalGraph,
    t_min: float = 0.0,
    t_max: float = 1.0,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_COEFF_TOL,
    cap: int = DEFAULT_CYCLE_CAP,
) -> SweepReport:
    nu = g.nu
    series0 = trace_fourier(g.scaled(0.0), nu)
    n, gamma = select_witness(series0, nu, tol)
    f = build_f(g, n, gamma, cap=cap)
    report = SweepReport((n, gamma), (t_min, t_max), f, constant_flag=f.is_constant_modulus)
    for t in find_zeros(f, t_min, t_max, samples):
        series = trace_fourier(g.scaled(t), nu)
        report.zeros.append(t)
        report.verdicts.append(flat_spectrum_verdict(series, nu, tol))
        report.residuals.append(abs(f(t)))
    return report
