"""Graph builders shared by the test modules."""

from __future__ import annotations

import math

import numpy as np

from magflat.graph import FundamentalGraph, OrientedEdge, VertexRecord, cover_is_connected


def ex2_graph(Q1: float = 0.0, alpha_o: float = math.pi / 4, field: bool = True) -> FundamentalGraph:
    """Two vertices, three parallel edges; phases alpha_o, pi + alpha_o, 0."""
    a1, a2 = (alpha_o, math.pi + alpha_o) if field else (0.0, 0.0)
    return FundamentalGraph(
        1,
        [VertexRecord("v0", 0.0), VertexRecord("v1", Q1)],
        [
            OrientedEdge("v0", "v1", (0,), a1),
            OrientedEdge("v0", "v1", (0,), a2),
            OrientedEdge("v0", "v1", (1,), 0.0),
        ],
    )


def zlattice(alpha: float = 0.0, Q: float = 0.0) -> FundamentalGraph:
    return FundamentalGraph(1, [VertexRecord("v0", Q)], [OrientedEdge("v0", "v0", (1,), alpha)])


def square_lattice() -> FundamentalGraph:
    return FundamentalGraph(
        2,
        [VertexRecord("v0", 0.0)],
        [OrientedEdge("v0", "v0", (1, 0), 0.0), OrientedEdge("v0", "v0", (0, 1), 0.0)],
    )


def isolated(Q: float = 5.0, d: int = 1) -> FundamentalGraph:
    return FundamentalGraph(d, [VertexRecord("v", Q)], [])


def doubled(g: FundamentalGraph, rng: np.random.Generator | None = None) -> FundamentalGraph:
    """Every edge of ``g`` duplicated with its phase shifted by +-pi."""
    edges = []
    for e in g.edges:
        shift = math.pi if rng is None or rng.random() < 0.5 else -math.pi
        edges += [e, OrientedEdge(e.source, e.target, e.tau, e.alpha + shift)]
    return FundamentalGraph(g.dimension, g.vertices, edges)


def random_graph(
    rng: np.random.Generator,
    nu_max: int = 4,
    d_max: int = 2,
    max_edges: int = 6,
    field: bool = True,
    connected_cover: bool = False,
    all_zero_tau: bool = False,
) -> FundamentalGraph:
    while True:
        nu = int(rng.integers(1, nu_max + 1))
        d = int(rng.integers(1, d_max + 1))
        pairs = [(int(rng.integers(0, v)), v) for v in range(1, nu)]
        extra = int(rng.integers(0, max_edges - len(pairs) + 1))
        pairs += [(int(rng.integers(0, nu)), int(rng.integers(0, nu))) for _ in range(extra)]
        edges = []
        for u, v in pairs:
            if rng.random() < 0.5:
                u, v = v, u
            tau = (0,) * d if all_zero_tau else tuple(int(x) for x in rng.integers(-1, 2, size=d))
            alpha = float(rng.uniform(-math.pi, math.pi)) if field else 0.0
            edges.append(OrientedEdge(f"v{u}", f"v{v}", tau, alpha))
        verts = [VertexRecord(f"v{i}", float(rng.uniform(-1, 1))) for i in range(nu)]
        g = FundamentalGraph(d, verts, edges)
        if not connected_cover or cover_is_connected(g):
            return g
