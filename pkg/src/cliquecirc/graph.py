"""Multigraph primitives, simple-cycle enumeration, and weight arithmetic.

Everything downstream works over one graph type: an undirected multigraph
with string vertex ids and tagged edges.  An edge's stored ``(u, v)`` order
fixes its forward orientation, so a single integer per edge determines a
skew-symmetric weight on both directions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import CycleCapExceeded, InputError

REAL = "real"
VIRTUAL = "virtual"
GADGET = "gadget"


@dataclass(frozen=True, order=True)
class Edge:
    """Tagged undirected edge.  ``tag`` is one of real / virtual / gadget."""

    id: str
    u: str
    v: str
    tag: str = REAL

    def other(self, x: str) -> str:
        if x == self.u:
            return self.v
        if x == self.v:
            return self.u
        raise InputError(f"{x!r} is not an endpoint of edge {self.id!r}")

    @property
    def endpoints(self) -> frozenset[str]:
        return frozenset((self.u, self.v))


class DirectedEdge(NamedTuple):
    """An edge traversed either along (forward) or against its stored order."""

    edge_id: str
    forward: bool

    def reversed(self) -> "DirectedEdge":
        return DirectedEdge(self.edge_id, not self.forward)


Cycle = tuple[DirectedEdge, ...]


class Graph:
    """Immutable undirected multigraph.

    Parameters
    ----------
    vertices : iterable of str
    edges : iterable of Edge
        Ids must be unique; self-loops are rejected.
    bipartition : (iterable, iterable), optional
        Left/right vertex classes.  When given they must partition the
        vertex set and every edge must cross.
    """

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Iterable[Edge],
        bipartition: tuple[Iterable[str], Iterable[str]] | None = None,
    ) -> None:
        self.vertices: frozenset[str] = frozenset(vertices)
        self.edges: dict[str, Edge] = {}
        for e in edges:
            if e.id in self.edges:
                raise InputError(f"duplicate edge id {e.id!r}")
            if e.u == e.v:
                raise InputError(f"self-loop {e.id!r} at {e.u!r}")
            if e.u not in self.vertices or e.v not in self.vertices:
                raise InputError(f"edge {e.id!r} has endpoint outside the vertex set")
            self.edges[e.id] = e
        if bipartition is not None:
            left, right = frozenset(bipartition[0]), frozenset(bipartition[1])
            if left & right:
                raise InputError("bipartition classes overlap")
            if left | right != self.vertices:
                raise InputError("bipartition does not cover the vertex set")
            for e in self.edges.values():
                if (e.u in left) == (e.v in left):
                    raise InputError(f"edge {e.id!r} does not cross the bipartition")
            self.bipartition: tuple[frozenset[str], frozenset[str]] | None = (left, right)
        else:
            self.bipartition = None

    @cached_property
    def adjacency(self) -> dict[str, tuple[tuple[str, str], ...]]:
        """v -> sorted tuple of (neighbor, edge_id) pairs."""
        adj: dict[str, list[tuple[str, str]]] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            adj[e.u].append((e.v, e.id))
            adj[e.v].append((e.u, e.id))
        return {v: tuple(sorted(pairs)) for v, pairs in adj.items()}

    def neighbors(self, v: str) -> list[str]:
        return sorted({nbr for nbr, _ in self.adjacency[v]})

    def degree(self, v: str) -> int:
        return len(self.adjacency[v])

    def edges_between(self, u: str, v: str) -> list[str]:
        return sorted(eid for nbr, eid in self.adjacency[u] if nbr == v)

    def edge(self, eid: str) -> Edge:
        return self.edges[eid]

    def sorted_edges(self) -> list[Edge]:
        return [self.edges[eid] for eid in sorted(self.edges)]

    def edges_with_tag(self, tag: str) -> list[Edge]:
        return [e for e in self.sorted_edges() if e.tag == tag]

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def induced_subgraph(self, keep: Iterable[str]) -> "Graph":
        keep = frozenset(keep)
        if not keep <= self.vertices:
            raise InputError("induced_subgraph got vertices outside the graph")
        edges = [e for e in self.sorted_edges() if e.u in keep and e.v in keep]
        bip = None
        if self.bipartition is not None:
            bip = (self.bipartition[0] & keep, self.bipartition[1] & keep)
        return Graph(keep, edges, bip)

    def without_edges(self, drop: Iterable[str]) -> "Graph":
        drop = set(drop)
        return Graph(
            self.vertices,
            [e for e in self.sorted_edges() if e.id not in drop],
            self.bipartition,
        )

    def with_extra_edges(self, extra: Iterable[Edge]) -> "Graph":
        return Graph(self.vertices, list(self.sorted_edges()) + list(extra), self.bipartition)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = set()
        start = min(self.vertices)
        stack = [start]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(nbr for nbr, _ in self.adjacency[v] if nbr not in seen)
        return seen == self.vertices

    def __repr__(self) -> str:  # pragma: no cover
        return f"Graph(|V|={self.num_vertices}, |E|={self.num_edges})"


def directed(graph: Graph, eid: str, tail: str, head: str) -> DirectedEdge:
    """The traversal of ``eid`` from tail to head."""
    e = graph.edges[eid]
    if (e.u, e.v) == (tail, head):
        return DirectedEdge(eid, True)
    if (e.v, e.u) == (tail, head):
        return DirectedEdge(eid, False)
    raise InputError(f"edge {eid!r} does not join {tail!r} and {head!r}")


def cycle_vertices(graph: Graph, cycle: Sequence[DirectedEdge]) -> list[str]:
    """Vertex sequence visited by the cycle, starting at the first tail."""
    out = []
    for d in cycle:
        e = graph.edges[d.edge_id]
        out.append(e.u if d.forward else e.v)
    return out

def reverse_cycle(cycle: Sequence[DirectedEdge]) -> Cycle:
    return tuple(d.reversed() for d in reversed(cycle))


def enumerate_simple_cycles(graph: Graph, cap: int = 2_000_000) -> list[Cycle]:
    """All simple cycles of the multigraph, each exactly once.

    A simple cycle visits distinct vertices and uses distinct edges; a pair
    of parallel edges counts as a cycle of length two.  Canonical form:
    the anchor is the smallest vertex on the cycle, and of the two
    traversal directions the one whose second vertex is smaller is kept
    (for two-vertex cycles, the smaller edge id leaves the anchor first).

    Raises CycleCapExceeded once more than ``cap`` cycles are found.
    """
    cycles: list[Cycle] = []
    adj = graph.adjacency

    def found(cycle: Cycle) -> None:
        cycles.append(cycle)
        if len(cycles) > cap:
            raise CycleCapExceeded(f"more than {cap} simple cycles")

    for anchor in sorted(graph.vertices):
        # length-2 cycles: unordered pairs of parallel edges above the anchor
        parallel: dict[str, list[str]] = {}
        for nbr, eid in adj[anchor]:
            if nbr > anchor:
                parallel.setdefault(nbr, []).append(eid)
        for nbr in sorted(parallel):
            for e1, e2 in itertools.combinations(sorted(parallel[nbr]), 2):
                found((directed(graph, e1, anchor, nbr), directed(graph, e2, nbr, anchor)))

        # longer cycles: DFS over vertices > anchor, closing back at the anchor
        path_edges: list[DirectedEdge] = []
        on_path: set[str] = {anchor}

        def extend(current: str, first_hop: str) -> None:
            for nbr, eid in adj[current]:
                if nbr == anchor:
                    if len(path_edges) >= 2 and first_hop < current:
                        found(tuple(path_edges) + (directed(graph, eid, current, anchor),))
                elif nbr > anchor and nbr not in on_path:
                    path_edges.append(directed(graph, eid, current, nbr))
                    on_path.add(nbr)
                    extend(nbr, first_hop)
                    on_path.remove(nbr)
                    path_edges.pop()

        for nbr, eid in adj[anchor]:
            if nbr > anchor:
                path_edges.append(directed(graph, eid, anchor, nbr))
                on_path.add(nbr)
                extend(nbr, nbr)
                on_path.remove(nbr)
                path_edges.pop()

    return cycles


@dataclass(frozen=True)
class WeightAssignment:
    """Integer weight per edge id, applying to the forward orientation.

    The reverse orientation implicitly carries the negated weight, which
    makes the induced directed weight function skew-symmetric by
    construction.
    """

    weights: Mapping[str, int]

    def of(self, d: DirectedEdge) -> int:
        w = self.weights[d.edge_id]
        return w if d.forward else -w

    def max_abs(self) -> int:
        return max((abs(w) for w in self.weights.values()), default=0)

    def max_bits(self) -> int:
        return max((abs(w).bit_length() for w in self.weights.values()), default=0)

    def restricted(self, edge_ids: Iterable[str]) -> "WeightAssignment":
        keep = set(edge_ids)
        return WeightAssignment({k: v for k, v in self.weights.items() if k in keep})

    def items(self) -> Iterator[tuple[str, int]]:
        return iter(sorted(self.weights.items()))


def circulation(cycle: Sequence[DirectedEdge], weights: WeightAssignment) -> int:
    """Signed sum of the cycle's edge weights in traversal order."""
    return sum(weights.of(d) for d in cycle)


def combine_shifted(
    layers: Sequence[Mapping[str, int]], base: int, num_vertices: int
) -> dict[str, int]:
    """Radix-combine weight layers, least significant first.

    Requires ``base > num_vertices * max|w|`` over every layer, so that no
    cycle sum in one layer can carry into the next.
    """
    bound = max(
        (abs(w) for layer in layers for w in layer.values()), default=0
    )
    if base <= num_vertices * bound:
        raise InputError(
            f"shift base {base} is not above num_vertices * max|w| = "
            f"{num_vertices * bound}"
        )
    out: dict[str, int] = {}
    for i, layer in enumerate(layers):
        scale = base**i
        for eid, w in layer.items():
            out[eid] = out.get(eid, 0) + scale * w
    return out
