"""Bipartite matching isolation from a nonzero-circulation function.

The undirected weight of an edge is its skew-symmetric weight read in
the fixed left-to-right orientation.  Two perfect matchings differ by a
disjoint union of alternating even cycles; each such cycle's circulation
is (up to sign) the difference of the matchings' undirected totals along
it, so nonzero circulation forces a unique minimum.  Everything here is
verified by enumeration, never assumed.
"""

from __future__ import annotations

from typing import Iterator

from .errors import InputError, VerificationError
from .graph import DirectedEdge, Graph, WeightAssignment

Matching = frozenset[str]


def matching_weights(g: Graph, w: WeightAssignment) -> dict[str, int]:
    """Undirected edge weights: each edge read left to right."""
    if g.bipartition is None:
        raise InputError("matching isolation needs a bipartite graph")
    left = g.bipartition[0]
    out: dict[str, int] = {}
    for eid in sorted(g.edges):
        e = g.edges[eid]
        out[eid] = w.of(DirectedEdge(eid, e.u in left))
    return out


def _all_matchings(g: Graph) -> Iterator[Matching]:
    """Every matching (any size), by scanning vertices in sorted order."""
    order = sorted(g.vertices)

    def rec(i: int, used: set[str], picked: list[str]) -> Iterator[Matching]:
        while i < len(order) and order[i] in used:
            i += 1
        if i == len(order):
            yield frozenset(picked)
            return
        v = order[i]
        yield from rec(i + 1, used | {v}, picked)
        for nbr, eid in g.adjacency[v]:
            if nbr not in used:
                picked.append(eid)
                yield from rec(i + 1, used | {v, nbr}, picked)
                picked.pop()

    yield from rec(0, set(), [])


def enumerate_perfect_matchings(g: Graph) -> list[Matching]:
    n = len(g.vertices)
    return sorted(
        (m for m in _all_matchings(g) if 2 * len(m) == n),
        key=sorted,
    )


def enumerate_maximum_matchings(g: Graph) -> list[Matching]:
    best: list[Matching] = []
    size = 0
    for m in _all_matchings(g):
        if len(m) > size:
            size = len(m)
            best = [m]
        elif len(m) == size:
            best.append(m)
    return sorted(set(best), key=sorted)


def _total(m: Matching, wund: dict[str, int]) -> int:
    return sum(wund[eid] for eid in m)


def _pick_unique_min(
    cands: list[Matching], wund: dict[str, int], what: str
) -> Matching:
    scored = sorted(cands, key=lambda m: (_total(m, wund), sorted(m)))
    if len(scored) > 1 and _total(scored[0], wund) == _total(scored[1], wund):
        raise VerificationError(
            f"two {what} tie at the minimum weight",
            witness=(sorted(scored[0]), sorted(scored[1])),
        )
    return scored[0]


def extract_min_pm(g: Graph, wund: dict[str, int]) -> Matching | None:
    """The unique minimum-weight perfect matching, or None if no perfect
    matching exists.  A tie is a counterexample and raises."""
    pms = enumerate_perfect_matchings(g)
    if not pms:
        return None
    return _pick_unique_min(pms, wund, "perfect matchings")


def extract_min_max_matching(g: Graph, wund: dict[str, int]) -> Matching:
    """Minimum-weight matching among the maximum-cardinality ones."""
    return _pick_unique_min(
        enumerate_maximum_matchings(g), wund, "maximum matchings"
    )


def verify_isolation(g: Graph, wund: dict[str, int]) -> dict:
    """Report whether the minimum-weight perfect matching is unique."""
    pms = enumerate_perfect_matchings(g)
    if not pms:
        return {"perfect_matchings": 0, "unique_min": None, "ties": []}
    totals = sorted((_total(m, wund), sorted(m)) for m in pms)
    low = totals[0][0]
    tied = [m for t, m in totals if t == low]
    return {
        "perfect_matchings": len(pms),
        "unique_min": len(tied) == 1,
        "min_weight": str(low),
        "ties": tied if len(tied) > 1 else [],
    }
