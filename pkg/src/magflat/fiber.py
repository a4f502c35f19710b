"""Fiber matrices H(k) = q - A(k) and their spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import GraphError, NumericError
from .graph import FundamentalGraph

HERMITIAN_TOL = 1e-13


@dataclass(frozen=True)
class FiberOperator:
    k: tuple[float, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class FiberSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None


def _arc_arrays(g: FundamentalGraph):
    arcs = g.arcs()
    tails = np.array([a.tail for a in arcs], dtype=int)
    heads = np.array([a.head for a in arcs], dtype=int)
    taus = np.array([a.tau for a in arcs], dtype=float).reshape(len(arcs), g.dimension)
    alphas = np.array([a.alpha for a in arcs], dtype=float)
    return tails, heads, taus, alphas


def _hermitize(m: np.ndarray) -> np.ndarray:
    # lower triangle is the conjugate of the upper; diagonal is real
    upper = np.triu(m, 1)
    out = upper + np.conj(np.swapaxes(upper, -1, -2))
    diag = np.real(np.diagonal(m, axis1=-2, axis2=-1))
    idx = np.arange(m.shape[-1])
    out[..., idx, idx] = diag
    return out


def fiber_matrices(g: FundamentalGraph, ks: np.ndarray) -> np.ndarray:
    """Stack of fiber matrices, shape ``(len(ks), nu, nu)``, for ``ks`` of shape ``(M, d)``."""
    ks = np.atleast_2d(np.asarray(ks, dtype=float))
    if ks.shape[1] != g.dimension:
        raise GraphError(f"dimension mismatch: quasimomentum has {ks.shape[1]} components, graph has {g.dimension}")
    nu = g.nu
    out = np.zeros((ks.shape[0], nu, nu), dtype=complex)
    tails, heads, taus, alphas = _arc_arrays(g)
    if len(tails):
        phase = alphas[None, :] + ks @ taus.T
        np.add.at(out, (slice(None), tails, heads), -np.exp(-1j * phase))
    q = np.array(g.degrees(), dtype=float) + np.array(g.potential)
    idx = np.arange(nu)
    out[:, idx, idx] += q
    return _hermitize(out)


def build_fiber(g: FundamentalGraph, k: Sequence[float]) -> FiberOperator:
    """Fiber matrix at quasimomentum ``k``.

    Entry (u, v) is ``(kappa_u + Q(u)) [u == v]`` minus the sum of
    ``exp(-i (alpha(e) + <tau(e), k>))`` over oriented edges e from u to v.
    """
    k = tuple(float(x) for x in np.atleast_1d(k))
    if len(k) != g.dimension:
        raise GraphError(f"dimension mismatch: quasimomentum has {len(k)} components, graph has {g.dimension}")
    return FiberOperator(k, fiber_matrices(g, np.array([k]))[0])


def _check_hermitian(m: np.ndarray) -> None:
    dev = np.max(np.abs(m - np.conj(m.T))) if m.size else 0.0
    if dev > HERMITIAN_TOL:
        raise NumericError(f"matrix is not Hermitian (max deviation {dev:.3e})")


def fiber_spectrum(h: FiberOperator | np.ndarray, want_vectors: bool = False) -> FiberSpectrum:
    m = h.matrix if isinstance(h, FiberOperator) else np.asarray(h)
    _check_hermitian(m)
    try:
        if not want_vectors:
            return FiberSpectrum(np.linalg.eigvalsh(m))
        w, x = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from None
    scale = max(np.linalg.norm(m, 2), np.finfo(float).tiny)
    resid = np.linalg.norm(m @ x - x * w, axis=0)
    if np.any(resid > 1e-10 * scale):
        raise NumericError(f"eigenpair residual {resid.max():.3e} too large")
    return FiberSpectrum(w, x)


def trace_power(h: FiberOperator | np.ndarray, n: int) -> float:
    """Tr(H^n) by repeated multiplication, returned as a real number."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = h.matrix if isinstance(h, FiberOperator) else np.asarray(h)
    p = m.copy()
    for _ in range(n - 1):
        p = p @ m
    tr = np.trace(p)
    norm = np.linalg.norm(m, 2)
    if abs(tr.imag) > 1e-10 * norm**n + 1e-300:
        raise NumericError(f"Tr H^{n} has imaginary part {tr.imag:.3e}; Hermitian invariant broken")
    return float(tr.real)
