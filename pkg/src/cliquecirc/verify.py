"""Brute-force ground truth: every check here enumerates, none trust the
construction.

The report schema is fixed:
``{cycles_total, zero_witnesses, min_abs_circulation, lemma4_violations,
lemma5_violations, max_bits}``.  Big integers inside reports are decimal
strings so the JSON survives double-parsing readers.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .auxtree import AuxTree
from .graph import (
    Cycle,
    DirectedEdge,
    Graph,
    WeightAssignment,
    circulation,
    enumerate_simple_cycles,
)
from .lift import LiftedGraph, check_connected_support
from .weights import (
    WeightParams,
    audit_highest_bag_dominance,
    audit_subtree_bound,
    bag_portions,
)


def verify_skew_symmetry(w) -> bool:
    """True iff traversing any edge backwards negates its weight.

    Accepts either the package's weight assignment (skew by storage; the
    accessor is still exercised) or a raw mapping keyed by
    (edge_id, forward) pairs, which is how a violating function can be
    expressed at all.
    """
    if isinstance(w, WeightAssignment):
        return all(
            w.of(DirectedEdge(eid, True)) == -w.of(DirectedEdge(eid, False))
            for eid in w.weights
        )
    if isinstance(w, Mapping):
        eids = {k[0] for k in w}
        return all(w.get((e, True), 0) == -w.get((e, False), 0) for e in eids)
    raise TypeError(f"cannot check skew-symmetry of {type(w).__name__}")


def verify_nonzero_circulation(
    g: Graph, w: WeightAssignment, cap: int = 1_000_000
) -> dict:
    """Enumerate every simple cycle and flag the zero-circulation ones."""
    cycles = enumerate_simple_cycles(g, cap)
    witnesses = []
    best: int | None = None
    for cyc in cycles:
        c = abs(circulation(cyc, w))
        if c == 0:
            witnesses.append([d.edge_id for d in cyc])
        if best is None or c < best:
            best = c
    return {
        "cycles_total": len(cycles),
        "zero_witnesses": witnesses,
        "min_abs_circulation": None if best is None else str(best),
    }


def _sanitize(violations: list[dict]) -> list[dict]:
    out = []
    for v in violations:
        out.append(
            {
                k: (str(x) if isinstance(x, int) and not isinstance(x, bool) else x)
                for k, x in v.items()
            }
        )
    return out


def audit_lemma_bounds(
    lifted: LiftedGraph,
    aux: AuxTree,
    cross: WeightAssignment,
    params: WeightParams,
    cycles: Sequence[Cycle] | None = None,
) -> dict:
    """Strict subtree bound and highest-bag dominance on every cycle,
    with the tightest ratios seen (how close the bounds came)."""
    if cycles is None:
        cycles = enumerate_simple_cycles(lifted.graph)
    l4 = audit_subtree_bound(lifted, aux, cross, params, cycles)
    l5 = audit_highest_bag_dominance(lifted, aux, cross, cycles)
    tight4 = 0.0
    margin5: float | None = None
    for cyc in cycles:
        por = bag_portions(cyc, lifted, cross)
        if not por:
            continue
        for b in aux.nodes:
            sub = aux.subtree_bags(b)
            portion = sum(por.get(x, 0) for x in sub)
            if portion == 0:
                continue
            bound = params.K ** aux.height(b) * aux.leaves(b)
            tight4 = max(tight4, abs(portion) / bound)
        used = set(por)
        if len(used) < 2:
            continue
        tops = [b for b in used if used <= set(aux.subtree_bags(b))]
        if len(tops) != 1:
            continue
        rest = sum(por[b] for b in used if b != tops[0])
        top = abs(por[tops[0]])
        ratio = float("inf") if rest == 0 else top / abs(rest)
        if margin5 is None or ratio < margin5:
            margin5 = ratio
    return {
        "lemma4_violations": l4,
        "lemma5_violations": l5,
        "lemma4_tightness": tight4,
        "lemma5_smallest_dominance": margin5,
    }


def audit_connected_support(
    lifted: LiftedGraph, cycles: Sequence[Cycle] | None = None
) -> list[dict]:
    """Cycles whose associated bags do not form a connected subtree."""
    if cycles is None:
        cycles = enumerate_simple_cycles(lifted.graph)
    bad = []
    for cyc in cycles:
        if not check_connected_support(lifted, cyc):
            bad.append(
                {
                    "cycle": [d.edge_id for d in cyc],
                    "bags": sorted({lifted.assoc[d.edge_id] for d in cyc}),
                }
            )
    return bad


def report_weight_bound(
    samples: Sequence[tuple[int, WeightAssignment]]
) -> tuple[list[int], float]:
    """Bit-lengths per instance plus the log-log growth slope.

    The slope of log2(max|w|) against log2(n) across an instance family
    estimates the polynomial degree of the weight bound.
    """
    if len(samples) < 2:
        raise ValueError("need at least two (n, weights) samples to fit")
    xs, ys, bits = [], [], []
    for n, w in samples:
        peak = max(w.max_abs(), 1)
        xs.append(math.log2(n))
        if peak.bit_length() < 900:
            ys.append(math.log2(peak))
        else:
            ys.append(float(peak.bit_length() - 1))
        bits.append(w.max_bits())
    slope = float(np.polyfit(xs, ys, 1)[0])
    return bits, slope


def full_report(
    g: Graph,
    w: WeightAssignment,
    lifted: LiftedGraph,
    aux: AuxTree,
    cross: WeightAssignment,
    params: WeightParams,
    cap: int = 1_000_000,
) -> dict:
    circ = verify_nonzero_circulation(g, w, cap)
    lem = audit_lemma_bounds(lifted, aux, cross, params)
    return {
        "cycles_total": circ["cycles_total"],
        "zero_witnesses": circ["zero_witnesses"],
        "min_abs_circulation": circ["min_abs_circulation"],
        "lemma4_violations": _sanitize(lem["lemma4_violations"]),
        "lemma5_violations": _sanitize(lem["lemma5_violations"]),
        "max_bits": w.max_bits(),
    }


def verify_pipeline(pr, cap: int = 1_000_000) -> dict:
    """Full report for an end-to-end pipeline result."""
    return full_report(
        pr.input_graph,
        pr.weights,
        pr.lifted,
        pr.aux,
        pr.wres.cross,
        pr.wres.params,
        cap,
    )
