"""Batch-update weighting for matchings.

After inserting a batch of N edges into a bipartite graph whose old
weight function already isolates, we emit a polynomially sized family of
candidate weight functions; at least one of them isolates a minimum
weight perfect matching of the grown graph.  Deletions need no
reweighting at all, the old function keeps working on what is left.

New edges get staged weights: powers of two reduced modulo small odd
primes, the stages glued with a shift base large enough that an earlier
stage always dominates everything after it.  Old edges keep their
original weights verbatim, so matchings made of old edges only keep
their relative order, and any matching touching a new edge is heavier
than every old-only matching.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InputError, VerificationError
from .graph import DirectedEdge, Edge, Graph, WeightAssignment, enumerate_simple_cycles
from .matching import enumerate_perfect_matchings, matching_weights


@dataclass(frozen=True)
class EdgePartition:
    """Current edge set split into old survivors and the inserted batch.

    ``real`` keeps insertion order; the edge at position j (1-based)
    gets base weight 2^j.
    """

    real: tuple[str, ...]
    fictitious: frozenset[str]

    def __post_init__(self) -> None:
        if len(set(self.real)) != len(self.real):
            raise InputError("inserted edge ids repeat")
        if set(self.real) & self.fictitious:
            raise InputError("an edge cannot be both real and fictitious")

    @property
    def batch_size(self) -> int:
        return len(self.real)

    def check_covers(self, g: Graph) -> None:
        if set(self.real) | self.fictitious != set(g.edges):
            raise InputError("edge partition does not cover the graph")


def num_stages(batch: int) -> int:
    """Stage count for a batch: ceil(log2 N), but at least one stage."""
    if batch <= 0:
        return 0
    return max(1, (batch - 1).bit_length())


def default_bit_budget(batch: int) -> int:
    return max(3, (4 * batch).bit_length())


def prime_pool(bit_budget: int) -> tuple[int, ...]:
    """All odd primes whose bit length fits the budget.

    2 stays out: powers of two vanish modulo 2, which would zero out a
    whole stage and let a new edge weigh nothing.
    """
    limit = (1 << bit_budget) - 1
    if limit < 3:
        raise InputError("prime bit budget admits no usable primes")
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = sieve[1] = 0
    for q in range(2, int(limit**0.5) + 1):
        if sieve[q]:
            step = range(q * q, limit + 1, q)
            sieve[q * q :: q] = bytearray(len(step))
    return tuple(p for p in range(3, limit + 1, 2) if sieve[p])


def base_weights(part: EdgePartition) -> WeightAssignment:
    """w_0: weight 2^j on the j-th inserted edge, zero on old edges."""
    vals = dict.fromkeys(part.fictitious, 0)
    for j, eid in enumerate(part.real, start=1):
        vals[eid] = 1 << j
    return WeightAssignment(vals)


def stage_residues(part: EdgePartition, p: int) -> dict[str, int]:
    """One stage: the base weights reduced modulo a single odd prime."""
    vals = dict.fromkeys(part.fictitious, 0)
    for j, eid in enumerate(part.real, start=1):
        vals[eid] = pow(2, j, p)
    return vals


def stage_weight(
    part: EdgePartition, primes: Sequence[int], base: int, upto: int
) -> dict[str, int]:
    """W_i for i = upto: stages glued left to right, earliest dominating."""
    if not 1 <= upto <= len(primes):
        raise InputError("stage index out of range")
    acc = dict.fromkeys([*part.real, *part.fictitious], 0)
    for p in primes[:upto]:
        res = stage_residues(part, p)
        for eid in acc:
            acc[eid] = acc[eid] * base + res[eid]
    return acc


def candidate_shift_base(
    g: Graph, part: EdgePartition, w_old: WeightAssignment, pool: Sequence[int]
) -> int:
    """Shift base working for both gluing jobs at once.

    It must exceed the batch size times the largest stage residue, so a
    stage cannot overturn the one before it, and the vertex count times
    the old peak, so the staged part cannot be overturned by old weights
    and one new edge outweighs any old-only matching.
    """
    top_residue = max(pool) - 1
    old_peak = max((abs(x) for x in w_old.weights.values()), default=0)
    return max(part.batch_size * top_residue, g.num_vertices * old_peak, 1) + 1


@dataclass(frozen=True)
class Candidate:
    """One member of the family: its prime vector and the full weights."""

    primes: tuple[int, ...]
    base: int
    weights: WeightAssignment


def candidate_families(
    g: Graph,
    part: EdgePartition,
    w_old: WeightAssignment,
    *,
    bit_budget: int | None = None,
    max_batch: int = 8,
) -> list[Candidate]:
    """Enumerate candidate weight functions over all prime vectors.

    Each candidate reads, in the left-to-right orientation,
    base * W_l(e) on inserted edges and the old weight on old edges.
    """
    part.check_covers(g)
    n_real = part.batch_size
    if n_real == 0:
        return []
    if n_real > max_batch:
        raise InputError(f"batch of {n_real} exceeds the configured bound {max_batch}")
    if g.bipartition is None:
        raise InputError("batch reweighting needs a bipartite graph")
    missing = sorted(part.fictitious - set(w_old.weights))
    if missing:
        raise InputError(f"old weights missing edges: {', '.join(missing)}")

    budget = default_bit_budget(n_real) if bit_budget is None else bit_budget
    pool = prime_pool(budget)
    stages = num_stages(n_real)
    base = candidate_shift_base(g, part, w_old, pool)
    left = g.bipartition[0]
    real_set = set(part.real)

    out = []
    for primes in itertools.product(pool, repeat=stages):
        top = stage_weight(part, primes, base, stages)
        vals = {}
        for eid in sorted(g.edges):
            e = g.edges[eid]
            if eid in real_set:
                # store the forward value so the left-to-right reading
                # is positive, keeping new edges expensive
                sign = 1 if e.u in left else -1
                vals[eid] = sign * base * top[eid]
            else:
                vals[eid] = w_old.weights[eid]
        out.append(Candidate(primes, base, WeightAssignment(vals)))
    return out


def select_isolating(candidates: Sequence[Candidate], g: Graph) -> Candidate:
    """First candidate whose minimum weight perfect matching is unique.

    The family is built so one must exist; running out of candidates is
    a falsification and raises with the full per-candidate audit.
    """
    pms = enumerate_perfect_matchings(g)
    audit = []
    for cand in candidates:
        wund = matching_weights(g, cand.weights)
        totals = sorted((sum(wund[e] for e in m), sorted(m)) for m in pms)
        if len(totals) < 2 or totals[0][0] != totals[1][0]:
            return cand
        audit.append(
            {
                "primes": list(cand.primes),
                "min_weight": str(totals[0][0]),
                "tied": [totals[0][1], totals[1][1]],
            }
        )
    raise VerificationError(
        "no candidate isolates a minimum weight perfect matching", witness=audit
    )


def stage_graph(
    g: Graph,
    part: EdgePartition,
    primes: Sequence[int],
    base: int,
    upto: int,
) -> Graph:
    """Union of the minimum weight perfect matchings at one stage."""
    w = stage_weight(part, primes, base, upto)
    pms = enumerate_perfect_matchings(g)
    if not pms:
        return Graph(g.vertices, [])
    totals = [(sum(w[e] for e in m), m) for m in pms]
    best = min(t for t, _ in totals)
    keep = sorted({eid for t, m in totals if t == best for eid in m})
    return Graph(g.vertices, [g.edges[eid] for eid in keep])


def check_invariant_stage(g_i: Graph, part: EdgePartition, i: int) -> bool:
    """True iff no cycle of the stage graph uses 1..2^(i+1) inserted edges.

    Cycles without any inserted edge are not counted: those alternate
    between old-only matchings and the old weight function already gives
    them nonzero circulation.
    """
    bound = 1 << (i + 1)
    real_set = set(part.real)
    for cyc in enumerate_simple_cycles(g_i):
        k = sum(1 for d in cyc if d.edge_id in real_set)
        if 1 <= k <= bound:
            return False
    return True


def cycle_four_tuple(
    g: Graph, part: EdgePartition, cycle: Sequence[DirectedEdge]
) -> tuple[str, str, str, str]:
    """Split a cycle into four consecutive paths and name their corners.

    The cycle is rotated so the smallest inserted edge id opens it; each
    path then opens with an inserted edge, the first three carry
    floor(k/4) inserted edges and the last takes the remainder.  Returns
    the four opening tail vertices.
    """
    real_set = set(part.real)
    starts = [i for i, d in enumerate(cycle) if d.edge_id in real_set]
    k = len(starts)
    if k < 4:
        raise InputError("four way partition needs at least four inserted edges")
    first = min(starts, key=lambda i: cycle[i].edge_id)
    rot = [*cycle[first:], *cycle[:first]]
    positions = [i for i, d in enumerate(rot) if d.edge_id in real_set]
    q = k // 4

    def tail(d: DirectedEdge) -> str:
        e = g.edges[d.edge_id]
        return e.u if d.forward else e.v

    return tuple(tail(rot[positions[t * q]]) for t in range(4))


def audit_four_tuples(
    g: Graph, part: EdgePartition, cycles: Iterable[Sequence[DirectedEdge]]
) -> list[dict]:
    """Report any two cycles sharing a four-tuple (there should be none)."""
    seen: dict[tuple, Sequence[DirectedEdge]] = {}
    clashes = []
    for cyc in cycles:
        t = cycle_four_tuple(g, part, cyc)
        if t in seen:
            clashes.append(
                {
                    "tuple": list(t),
                    "cycles": [
                        sorted(d.edge_id for d in seen[t]),
                        sorted(d.edge_id for d in cyc),
                    ],
                }
            )
        else:
            seen[t] = cyc
    return clashes


def apply_batch(
    g: Graph, inserts: Iterable[Edge], deletes: Iterable[str] = ()
) -> tuple[Graph, EdgePartition]:
    """Delete, then insert, returning the new graph and its partition."""
    dels = set(deletes)
    unknown = sorted(dels - set(g.edges))
    if unknown:
        raise InputError(f"cannot delete unknown edges: {', '.join(unknown)}")
    new = list(inserts)
    for e in new:
        if e.id in g.edges or e.u not in g.vertices or e.v not in g.vertices:
            raise InputError(f"bad inserted edge {e.id}: fresh id, known endpoints")
    kept = [g.edges[eid] for eid in sorted(g.edges) if eid not in dels]
    g2 = Graph(g.vertices, kept + new, bipartition=g.bipartition)
    part = EdgePartition(
        tuple(e.id for e in new), frozenset(e.id for e in kept)
    )
    return g2, part


@dataclass(frozen=True)
class DynResult:
    graph: Graph
    partition: EdgePartition
    candidates: tuple[Candidate, ...]
    chosen: Candidate | None
    weights: WeightAssignment


def dyn_update(
    g: Graph,
    w_old: WeightAssignment,
    inserts: Iterable[Edge],
    deletes: Iterable[str] = (),
    *,
    bit_budget: int | None = None,
    max_batch: int = 8,
) -> DynResult:
    """One update step: apply the batch, then reweight if anything came in."""
    g2, part = apply_batch(g, inserts, deletes)
    if part.batch_size == 0:
        # deletion can only remove cycles, the old weights still work
        kept = {eid: w_old.weights[eid] for eid in g2.edges}
        return DynResult(g2, part, (), None, WeightAssignment(kept))
    cands = candidate_families(
        g2, part, w_old, bit_budget=bit_budget, max_batch=max_batch
    )
    chosen = select_isolating(cands, g2)
    return DynResult(g2, part, tuple(cands), chosen, chosen.weights)
