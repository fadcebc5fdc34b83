"""Shared brute-force oracles used across the test suite.

These deliberately reimplement things the library also computes, using a
different (slower, dumber) method, so agreement is meaningful.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from cliquecirc.graph import Cycle, DirectedEdge, Edge, Graph


def subset_is_simple_cycle(graph: Graph, edge_ids: Sequence[str]) -> bool:
    """True iff the edge subset forms one simple cycle (all degrees 2,
    connected support)."""
    deg: dict[str, int] = {}
    for eid in edge_ids:
        e = graph.edges[eid]
        deg[e.u] = deg.get(e.u, 0) + 1
        deg[e.v] = deg.get(e.v, 0) + 1
    if not deg or any(d != 2 for d in deg.values()):
        return False
    # connectivity of the support
    support = set(deg)
    adj: dict[str, set[str]] = {v: set() for v in support}
    for eid in edge_ids:
        e = graph.edges[eid]
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)
    seen: set[str] = set()
    stack = [next(iter(support))]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj[v] - seen)
    return seen == support


def count_cycles_by_subsets(graph: Graph) -> int:
    """Cycle count via brute force over all edge subsets.  Exponential."""
    eids = sorted(graph.edges)
    count = 0
    for r in range(2, len(eids) + 1):
        for subset in itertools.combinations(eids, r):
            if subset_is_simple_cycle(graph, subset):
                count += 1
    return count


def assert_valid_cycle(graph: Graph, cycle: Cycle) -> None:
    """Re-check from scratch that a traversal is a simple closed walk."""
    assert len(cycle) >= 2
    eids = [d.edge_id for d in cycle]
    assert len(set(eids)) == len(eids), "repeated edge"
    tails, heads = [], []
    for d in cycle:
        e = graph.edges[d.edge_id]
        tail, head = (e.u, e.v) if d.forward else (e.v, e.u)
        tails.append(tail)
        heads.append(head)
    assert len(set(tails)) == len(tails), "repeated vertex"
    for i, head in enumerate(heads):
        assert head == tails[(i + 1) % len(cycle)], "not contiguous"


def graph_from_pairs(pairs: Iterable[tuple[str, str]], prefix: str = "e") -> Graph:
    """Quick multigraph builder for tests; edge ids e0, e1, ..."""
    pairs = list(pairs)
    vertices = sorted({v for p in pairs for v in p})
    edges = [Edge(f"{prefix}{i}", u, v) for i, (u, v) in enumerate(pairs)]
    return Graph(vertices, edges)
