"""Fundamental graphs of periodic graphs with magnetic and electric potentials.

A periodic graph is never materialized. The quotient (fundamental) graph is
the input: a finite multigraph whose oriented edges carry an integer index
``tau`` (which lattice translate the edge lands in) and a magnetic phase
``alpha`` in radians. Only one orientation of each unoriented edge is stored;
the inverse ``(to, from, -tau, -alpha)`` is implicit.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterator, Sequence

from .errors import GraphError


@dataclass(frozen=True)
class VertexRecord:
    id: str
    Q: float = 0.0


@dataclass(frozen=True)
class OrientedEdge:
    source: str
    target: str
    tau: tuple[int, ...]
    alpha: float = 0.0

    def inverse(self) -> "OrientedEdge":
        return OrientedEdge(self.target, self.source, tuple(-t for t in self.tau), -self.alpha)

    @property
    def is_loop(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class Arc:
    """An oriented edge resolved to dense vertex indices."""

    tail: int
    head: int
    tau: tuple[int, ...]
    alpha: float
    edge: int          # position of the stored edge in the input list
    reversed: bool     # True for the implicit inverse orientation


@dataclass(frozen=True)
class FundamentalGraph:
    """Immutable fundamental graph.

    Vertices keep input order and are addressed by dense indices
    ``0..nu-1`` in every matrix.
    """

    dimension: int
    vertices: tuple[VertexRecord, ...]
    edges: tuple[OrientedEdge, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        _validate(self)
        object.__setattr__(self, "_index", {v.id: i for i, v in enumerate(self.vertices)})

    @property
    def nu(self) -> int:
        return len(self.vertices)

    @property
    def potential(self) -> tuple[float, ...]:
        return tuple(v.Q for v in self.vertices)

    def index_of(self, vertex_id: str) -> int:
        try:
            return self._index[vertex_id]
        except KeyError:
            raise GraphError(f"unknown vertex {vertex_id!r}") from None

    def degree(self, vertex_id: str) -> int:
        """Number of oriented edges starting at the vertex (loops count twice)."""
        return sum(1 for _ in oriented_edges_from(self, vertex_id))

    def degrees(self) -> list[int]:
        deg = [0] * self.nu
        for e in self.edges:
            deg[self._index[e.source]] += 1
            deg[self._index[e.target]] += 1
        return deg

    def arcs(self) -> list[Arc]:
        """All oriented edges (stored ones, then their inverses), by vertex index."""
        out = []
        for pos, e in enumerate(self.edges):
            out.append(Arc(self._index[e.source], self._index[e.target], e.tau, e.alpha, pos, False))
        for pos, e in enumerate(self.edges):
            inv = e.inverse()
            out.append(Arc(self._index[inv.source], self._index[inv.target], inv.tau, inv.alpha, pos, True))
        return out

    @property
    def tau_max(self) -> float:
        """Largest Euclidean norm of an edge index (0 for an edgeless graph)."""
        return max((math.hypot(*e.tau) for e in self.edges), default=0.0)

    def scaled(self, t: float) -> "FundamentalGraph":
        """The same graph with magnetic potential ``t * alpha``."""
        edges = [OrientedEdge(e.source, e.target, e.tau, t * e.alpha) for e in self.edges]
        return FundamentalGraph(self.dimension, self.vertices, edges)

    def with_potential(self, Q: Sequence[float]) -> "FundamentalGraph":
        if len(Q) != self.nu:
            raise GraphError(f"expected {self.nu} potential values, got {len(Q)}")
        verts = [VertexRecord(v.id, float(q)) for v, q in zip(self.vertices, Q)]
        return FundamentalGraph(self.dimension, verts, self.edges)

    def without_field(self) -> "FundamentalGraph":
        return self.scaled(0.0)


def _validate(g: FundamentalGraph) -> None:
    if not isinstance(g.dimension, int) or isinstance(g.dimension, bool) or g.dimension < 1:
        raise GraphError(f"dimension must be a positive integer, got {g.dimension!r}")
    if not g.vertices:
        raise GraphError("graph has no vertices")
    seen = set()
    for i, v in enumerate(g.vertices):
        if v.id in seen:
            raise GraphError(f"vertex {i}: duplicate id {v.id!r}")
        seen.add(v.id)
        if not math.isfinite(v.Q):
            raise GraphError(f"vertex {v.id!r}: non-finite Q")
    for i, e in enumerate(g.edges):
        where = f"edge {i} ({e.source}->{e.target})"
        for end in (e.source, e.target):
            if end not in seen:
                raise GraphError(f"{where}: unknown vertex id {end!r}")
        if len(e.tau) != g.dimension:
            raise GraphError(
                f"{where}: dimension mismatch, tau has {len(e.tau)} components, expected {g.dimension}"
            )
        if not math.isfinite(e.alpha):
            raise GraphError(f"{where}: non-finite alpha")
    if not _is_connected(g):
        raise GraphError("fundamental graph is not connected")


def _is_connected(g: FundamentalGraph) -> bool:
    adj: dict[str, set[str]] = {v.id: set() for v in g.vertices}
    for e in g.edges:
        adj[e.source].add(e.target)
        adj[e.target].add(e.source)
    start = g.vertices[0].id
    reached = {start}
    queue = deque([start])
    while queue:
        for w in adj[queue.popleft()]:
            if w not in reached:
                reached.add(w)
                queue.append(w)
    return len(reached) == len(adj)


def compute_edge_index(u_offset: Sequence[int], v_offset: Sequence[int]) -> tuple[int, ...]:
    """Edge index of an edge from cell ``u_offset`` to cell ``v_offset``."""
    if len(u_offset) != len(v_offset):
        raise GraphError(f"offset length mismatch: {len(u_offset)} vs {len(v_offset)}")
    return tuple(int(b) - int(a) for a, b in zip(u_offset, v_offset))


def oriented_edges_from(g: FundamentalGraph, v: str) -> Iterator[tuple[str, tuple[int, ...], float]]:
    """Yield ``(to, tau, alpha)`` for every oriented edge starting at ``v``.

    Stored edges leaving ``v`` come first in file order, then inverses of
    stored edges entering ``v``. A loop therefore shows up twice.
    """
    g.index_of(v)
    for e in g.edges:
        if e.source == v:
            yield e.target, e.tau, e.alpha
    for e in g.edges:
        if e.target == v:
            yield e.source, tuple(-t for t in e.tau), -e.alpha


def cycle_index_generators(g: FundamentalGraph) -> list[tuple[int, ...]]:
    """Indices of the fundamental cycles relative to a BFS spanning tree."""
    nu = g.nu
    pot: list[tuple[int, ...] | None] = [None] * nu
    pot[0] = (0,) * g.dimension
    tree_edges = set()
    adj: list[list[tuple[int, int, tuple[int, ...]]]] = [[] for _ in range(nu)]
    for a in g.arcs():
        adj[a.tail].append((a.head, a.edge, a.tau))
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w, pos, tau in adj[u]:
            if pot[w] is None:
                pot[w] = tuple(p + t for p, t in zip(pot[u], tau))
                tree_edges.add(pos)
                queue.append(w)
    gens = []
    for pos, e in enumerate(g.edges):
        if pos in tree_edges:
            continue
        pu, pv = pot[g.index_of(e.source)], pot[g.index_of(e.target)]
        gen = tuple(pu_ + t - pv_ for pu_, t, pv_ in zip(pu, e.tau, pv))
        if any(gen):
            gens.append(gen)
    return gens


def _echelon(vectors: list[tuple[int, ...]], d: int) -> list[list[int]]:
    rows = [list(v) for v in vectors if any(v)]
    basis = []
    for col in range(d):
        while True:
            live = [r for r in rows if r[col] != 0]
            if len(live) <= 1:
                break
            piv = min(live, key=lambda r: abs(r[col]))
            for r in live:
                if r is not piv:
                    q = r[col] // piv[col]
                    for j in range(d):
                        r[j] -= q * piv[j]
            rows = [r for r in rows if any(r)]
        live = [r for r in rows if r[col] != 0]
        if live:
            basis.append(live[0])
            rows = [r for r in rows if r is not live[0]]
    return basis


def cover_is_connected(g: FundamentalGraph) -> bool:
    """Whether the periodic cover is connected.

    True iff the cycle indices of the fundamental graph generate all of
    ``Z^d``. This is not enforced on load; it is offered for callers that
    rely on results valid only for connected periodic graphs.
    """
    basis = _echelon(cycle_index_generators(g), g.dimension)
    return len(basis) == g.dimension and all(abs(r[i]) == 1 for i, r in enumerate(basis))


# -- serialization ----------------------------------------------------------

def _from_obj(obj) -> FundamentalGraph:
    if not isinstance(obj, dict):
        raise GraphError("top-level JSON value must be an object")
    for key in ("dimension", "vertices", "edges"):
        if key not in obj:
            raise GraphError(f"missing key {key!r}")
    d = obj["dimension"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise GraphError(f"dimension must be a positive integer, got {d!r}")
    verts = []
    for i, rec in enumerate(obj["vertices"]):
        if not isinstance(rec, dict) or "id" not in rec:
            raise GraphError(f"vertex {i}: expected an object with an 'id'")
        try:
            verts.append(VertexRecord(str(rec["id"]), float(rec.get("Q", 0.0))))
        except (TypeError, ValueError):
            raise GraphError(f"vertex {i} ({rec['id']}): Q is not a number") from None
    edges = []
    for i, rec in enumerate(obj["edges"]):
        if not isinstance(rec, dict) or not {"from", "to", "tau"} <= rec.keys():
            raise GraphError(f"edge {i}: expected an object with 'from', 'to' and 'tau'")
        tau = rec["tau"]
        if not isinstance(tau, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in tau):
            raise GraphError(f"edge {i}: tau must be a list of integers")
        if len(tau) != d:
            raise GraphError(f"edge {i}: dimension mismatch, tau has {len(tau)} components, expected {d}")
        try:
            alpha = float(rec.get("alpha", 0.0))
        except (TypeError, ValueError):
            raise GraphError(f"edge {i}: alpha is not a number") from None
        edges.append(OrientedEdge(str(rec["from"]), str(rec["to"]), tuple(tau), alpha))
    return FundamentalGraph(d, verts, edges)


def loads(text: str | bytes) -> FundamentalGraph:
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise GraphError(f"parse failure: {exc}") from None
    return _from_obj(obj)


def load_graph(source: IO | str | Path) -> FundamentalGraph:
    """Read a graph from a path or an open (text or binary) stream."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return loads(fh.read())
    return loads(source.read())


def to_dict(g: FundamentalGraph) -> dict:
    return {
        "dimension": g.dimension,
        "vertices": [{"id": v.id, "Q": v.Q} for v in g.vertices],
        "edges": [
            {"from": e.source, "to": e.target, "tau": list(e.tau), "alpha": e.alpha}
            for e in g.edges
        ],
    }


def dumps(g: FundamentalGraph) -> str:
    return json.dumps(to_dict(g), indent=2)
