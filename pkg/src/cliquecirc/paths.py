"""Unique minimum-weight routes between all vertex pairs.

Shifting every edge weight by a base M larger than any possible path
total makes all weights positive and makes edge count the dominant term:
a minimum walk is then necessarily a simple path, and two distinct
minimum paths would close into a cycle whose circulation must be zero,
which the weight function rules out.
"""

from __future__ import annotations

from .errors import InputError
from .graph import Graph, WeightAssignment, directed


def shift_base(g: Graph, w: WeightAssignment) -> int:
    return len(g.vertices) * w.max_abs() + 1


def _simple_paths(g: Graph, s: str, t: str):
    """Every simple s-t path as a list of directed steps (tail, head, eid)."""
    path: list[tuple[str, str, str]] = []
    seen = {s}

    def rec(cur: str):
        if cur == t:
            yield list(path)
            return
        for nbr, eid in g.adjacency[cur]:
            if nbr in seen:
                continue
            seen.add(nbr)
            path.append((cur, nbr, eid))
            yield from rec(nbr)
            path.pop()
            seen.discard(nbr)

    yield from rec(s)


def unique_shortest_paths(
    g: Graph, w: WeightAssignment, M: int | None = None
) -> dict:
    """All-pairs check that the minimum shifted-weight path is unique."""
    if M is None:
        M = shift_base(g, w)
    elif M <= len(g.vertices) * w.max_abs():
        raise InputError("shift base must exceed n * max|w|")
    ties = []
    pairs = 0
    for s in sorted(g.vertices):
        for t in sorted(g.vertices):
            if s == t:
                continue
            best: int | None = None
            best_paths: list[list[str]] = []
            for steps in _simple_paths(g, s, t):
                total = len(steps) * M + sum(
                    w.of(directed(g, eid, a, b)) for a, b, eid in steps
                )
                if best is None or total < best:
                    best = total
                    best_paths = [[eid for _, _, eid in steps]]
                elif total == best:
                    best_paths.append([eid for _, _, eid in steps])
            if best is None:
                continue
            pairs += 1
            if len(best_paths) > 1:
                ties.append(
                    {"s": s, "t": t, "weight": str(best), "paths": best_paths}
                )
    return {
        "pairs_checked": pairs,
        "ties": ties,
        "unique": not ties,
        "M": str(M),
    }
