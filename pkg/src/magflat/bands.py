"""Band functions sampled on a uniform quasimomentum grid.

Band extremes come straight from the grid samples with no interpolation, so
an interior extremum between grid points is missed by O(1/N^2). A flat flag
from the grid can falsify flatness but never prove it; the exact check lives
in :mod:`magflat.traces`.
"""

from __future__ import annotations

import io
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, NumericError
from .fiber import fiber_matrices
from .graph import FundamentalGraph

DEFAULT_GRID = 64
DEFAULT_FLAT_TOL = 1e-10
DEFAULT_MATCH_TOL = 1e-8
DEFAULT_WORK_BUDGET = 2e9
_CHUNK = 4096


@dataclass(frozen=True)
class KGrid:
    """Uniform grid ``{2 pi m / N : m in {0..N-1}^d}`` on the torus."""

    resolution: int
    dimension: int

    def __post_init__(self):
        if self.resolution < 1 or self.dimension < 1:
            raise ValueError("grid resolution and dimension must be positive")

    @property
    def size(self) -> int:
        return self.resolution**self.dimension

    @property
    def points(self) -> np.ndarray:
        axis = 2 * np.pi * np.arange(self.resolution) / self.resolution
        mesh = itertools.product(axis, repeat=self.dimension)
        return np.array(list(mesh), dtype=float).reshape(self.size, self.dimension)


@dataclass(frozen=True)
class BandStructure:
    grid: KGrid
    samples: np.ndarray            # (grid.size, nu), each row sorted ascending
    lower: np.ndarray
    upper: np.ndarray
    flat_tol: float
    flat_eigenvalues: list = field(default_factory=list)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def flat_flags(self) -> np.ndarray:
        return self.widths <= self.flat_tol

    @property
    def bands(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.lower, self.upper)]

    def spectrum(self) -> list[tuple[float, float]]:
        """Union of the band intervals as disjoint sorted intervals."""
        merged: list[list[float]] = []
        for lo, hi in sorted(self.bands):
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return [(a, b) for a, b in merged]


def _eigvals_chunk(g: FundamentalGraph, ks: np.ndarray) -> np.ndarray:
    mats = fiber_matrices(g, ks)
    try:
        return np.linalg.eigvalsh(mats)
    except np.linalg.LinAlgError:
        for k, m in zip(ks, mats):
            try:
                np.linalg.eigvalsh(m)
            except np.linalg.LinAlgError:
                raise NumericError(f"eigensolver failed at k={tuple(k)}") from None
        raise


def compute_bands(
    g: FundamentalGraph,
    grid: KGrid | int = DEFAULT_GRID,
    flat_tol: float = DEFAULT_FLAT_TOL,
    match_tol: float = DEFAULT_MATCH_TOL,
    budget: float = DEFAULT_WORK_BUDGET,
    workers: int = 1,
) -> BandStructure:
    """Sample all band functions of ``g`` on ``grid``.

    Chunks of grid points may be diagonalized on several threads; results
    are stitched back in grid order, so the output does not depend on
    ``workers``.
    """
    if isinstance(grid, int):
        grid = KGrid(grid, g.dimension)
    if grid.dimension != g.dimension:
        raise ValueError(f"grid dimension {grid.dimension} != graph dimension {g.dimension}")
    if flat_tol <= 0 or match_tol <= 0:
        raise ValueError("tolerances must be positive")
    work = float(grid.size) * g.nu**3
    if work > budget:
        raise BudgetError(f"grid work {work:.3g} exceeds budget {budget:.3g}")
    pts = grid.points
    chunks = [pts[i : i + _CHUNK] for i in range(0, len(pts), _CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _eigvals_chunk(g, c), chunks))
    else:
        parts = [_eigvals_chunk(g, c) for c in chunks]
    samples = np.concatenate(parts, axis=0)
    bs = BandStructure(grid, samples, samples.min(axis=0), samples.max(axis=0), flat_tol)
    object.__setattr__(bs, "flat_eigenvalues", detect_flat_eigenvalues(bs, match_tol))
    return bs


def detect_flat_eigenvalues(bs: BandStructure, match_tol: float = DEFAULT_MATCH_TOL) -> list[float]:
    """Values that are (within ``match_tol``) an eigenvalue at every grid point.

    Candidates are the distinct eigenvalues at k = 0. This is only a
    necessary condition for an eigenvalue of infinite multiplicity.
    """
    candidates: list[float] = []
    for lam in bs.samples[0]:
        if not candidates or lam - candidates[-1] > match_tol:
            candidates.append(float(lam))
    found = []
    for lam in candidates:
        hit = np.min(np.abs(bs.samples - lam), axis=1) <= match_tol
        if hit.all():
            found.append(lam)
    return found


def first_band_width(bs: BandStructure) -> float:
    return float(bs.upper[0] - bs.lower[0])


def bands_csv(bs: BandStructure) -> str:
    d = bs.grid.dimension
    nu = bs.samples.shape[1]
    buf = io.StringIO()
    header = [f"k_{i + 1}" for i in range(d)] + [f"lambda_{j + 1}" for j in range(nu)]
    buf.write(",".join(header) + "\n")
    for k, row in zip(bs.grid.points, bs.samples):
        buf.write(",".join(format(float(x), ".17g") for x in (*k, *row)) + "\n")
    return buf.getvalue()
