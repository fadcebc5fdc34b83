"""Pulling bag-level weights back to the glued graph and the input.

Each glued edge is realized inside the bag graph as a directed walk: a
chain of copy edges descending from one endpoint's topmost bag, the
placed copy of the edge itself, and a chain of copy edges climbing to
the other endpoint's topmost bag.  Summing bag weights over the walk
gives a weight on the glued graph; composing with the gadget maps from
normalization lands back on the caller's original graph.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

from .auxtree import AuxTree, build_aux
from .decompose import ComponentTree, decompose_full, merge_ctype_neighbors
from .errors import CliqueCircError, StructuralError
from .graph import (
    Cycle,
    DirectedEdge,
    Graph,
    WeightAssignment,
    directed,
    reverse_cycle,
)
from .jsonio import dump_json, graph_to_obj, weights_to_obj
from .lift import LiftedGraph, copy_edge_id, lift
from .normalize import GadgetMap, normalize
from .treedec import TreeDecomp, build_hybrid
from .weights import WeightsResult, assemble_wprime


@dataclass
class PullbackMap:
    """One directed bag-graph walk per glued edge, reversal-symmetric."""

    graph: Graph
    lifted: LiftedGraph
    paths: dict[str, Cycle]

    def path(self, d: DirectedEdge) -> Cycle:
        p = self.paths[d.edge_id]
        return p if d.forward else reverse_cycle(p)


def _up_path(dec: TreeDecomp, frm: str, to: str) -> list[str]:
    """Bags from `frm` up to its ancestor `to`, inclusive."""
    out = [frm]
    cur = frm
    while cur != to:
        nxt = dec.parent[cur]
        if nxt is None:
            raise StructuralError(
                f"bag {to!r} is not an ancestor of bag {frm!r}"
            )
        cur = nxt
        out.append(cur)
    return out


def build_pullback_map(g: Graph, lifted: LiftedGraph) -> PullbackMap:
    dec = lifted.dec
    lg = lifted.graph
    paths: dict[str, Cycle] = {}
    for eid in sorted(g.edges):
        e = g.edges[eid]
        top_u = dec.highest_bag_with(e.u)
        top_v = dec.highest_bag_with(e.v)
        home = dec.highest_bag_with_pair(e.u, e.v)
        steps: list[DirectedEdge] = []
        down = _up_path(dec, home, top_u)
        for child, par in reversed(list(zip(down, down[1:]))):
            steps.append(
                directed(
                    lg,
                    copy_edge_id(e.u, par, child),
                    f"{e.u}@{par}",
                    f"{e.u}@{child}",
                )
            )
        steps.append(
            directed(lg, lifted.intra_of[eid], f"{e.u}@{home}", f"{e.v}@{home}")
        )
        up = _up_path(dec, home, top_v)
        for child, par in zip(up, up[1:]):
            steps.append(
                directed(
                    lg,
                    copy_edge_id(e.v, par, child),
                    f"{e.v}@{child}",
                    f"{e.v}@{par}",
                )
            )
        paths[eid] = tuple(steps)
    return PullbackMap(g, lifted, paths)


def pull_weights(wprime: WeightAssignment, pm: PullbackMap) -> WeightAssignment:
    """Sum the bag-graph weights along each edge's walk."""
    return WeightAssignment(
        {
            eid: sum(wprime.of(d) for d in pm.paths[eid])
            for eid in sorted(pm.paths)
        }
    )


def pull_cycle(pm: PullbackMap, cycle: Sequence[DirectedEdge]) -> list[DirectedEdge]:
    """Concatenated walk realizing a glued cycle in the bag graph."""
    out: list[DirectedEdge] = []
    for d in cycle:
        out.extend(pm.path(d))
    return out


def cancel_reverse_pairs(graph: Graph, walk: Sequence[DirectedEdge]) -> Cycle:
    """Strip edges traversed both ways; the rest must chain into one
    simple cycle, anything else is reported as a structural failure."""
    net: dict[str, int] = {}
    for d in walk:
        net[d.edge_id] = net.get(d.edge_id, 0) + (1 if d.forward else -1)
    residue: list[DirectedEdge] = []
    for eid in sorted(net):
        if net[eid] == 0:
            continue
        if abs(net[eid]) != 1:
            raise StructuralError(
                "walk traverses an edge twice in one direction", witness=[eid]
            )
        residue.append(DirectedEdge(eid, net[eid] > 0))
    if not residue:
        raise StructuralError("walk cancels away entirely")
    by_tail: dict[str, DirectedEdge] = {}
    for d in residue:
        e = graph.edges[d.edge_id]
        tail = e.u if d.forward else e.v
        if tail in by_tail:
            raise StructuralError(
                "cancelled walk branches", witness=[tail]
            )
        by_tail[tail] = d
    start = min(residue, key=lambda d: d.edge_id)
    e = graph.edges[start.edge_id]
    origin = e.u if start.forward else e.v
    ordered = [start]
    cur = e.v if start.forward else e.u
    while cur != origin:
        d = by_tail.get(cur)
        if d is None:
            raise StructuralError(
                "cancelled walk does not close", witness=[cur]
            )
        ordered.append(d)
        e = graph.edges[d.edge_id]
        cur = e.v if d.forward else e.u
    if len(ordered) != len(residue):
        raise StructuralError(
            "cancelled walk splits into several cycles",
            witness=sorted(d.edge_id for d in residue if d not in ordered),
        )
    return tuple(ordered)


def pull_through_gadgets(
    w: WeightAssignment, gm: GadgetMap, g0: Graph
) -> WeightAssignment:
    """Sum weights along each original edge's gadget replacement path."""
    out: dict[str, int] = {}
    for eid in sorted(g0.edges):
        total = 0
        for pid, fwd in gm.path(eid):
            step = w.weights[pid]
            total += step if fwd else -step
        out[eid] = total
    return WeightAssignment(out)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class PipelineResult:
    """Everything the construction produced, ending in weights on the
    caller's own edges."""

    input_graph: Graph
    tree: ComponentTree
    gadget_map: GadgetMap
    dec: TreeDecomp
    lifted: LiftedGraph
    aux: AuxTree
    wres: WeightsResult
    pm: PullbackMap
    glued_weights: WeightAssignment
    weights: WeightAssignment

    def manifest_obj(self) -> dict:
        return {
            "weights": weights_to_obj(self.weights),
            "K": self.wres.params.K,
            "B_shift": str(self.wres.params.b_shift),
            "m": self.wres.params.m,
            "max_bits": self.weights.max_bits(),
            "stages": {
                "input": _digest(dump_json(graph_to_obj(self.input_graph))),
                "component_tree": _digest(dump_json(self.tree.to_obj())),
                "gadget_map": _digest(dump_json(self.gadget_map.to_obj())),
                "bag_tree": _digest(dump_json(self.dec.to_obj())),
                "bag_weights": _digest(
                    dump_json(weights_to_obj(self.wres.weights))
                ),
                "glued_weights": _digest(
                    dump_json(weights_to_obj(self.glued_weights))
                ),
            },
        }


def _stage(name: str, fn, *args, **kwargs):
    # tag failures with the stage that raised them, keeping the class
    try:
        return fn(*args, **kwargs)
    except CliqueCircError as exc:
        if exc.args and isinstance(exc.args[0], str):
            exc.args = (f"[{name}] {exc.args[0]}",) + exc.args[1:]
        raise


def end_to_end(
    g0: Graph,
    width: int,
    cycle_cap: int = 2_000_000,
    retries: int = 3,
) -> PipelineResult:
    """Full construction: decompose, normalize, weight, pull back."""
    tree0 = _stage("decompose", lambda: merge_ctype_neighbors(decompose_full(g0, width)))
    tree, gm = _stage("normalize", normalize, tree0)
    dec = _stage("bag-tree", build_hybrid, tree)
    glued = tree.glued_graph()
    lifted = _stage("lift", lift, glued, dec)
    aux = _stage("aux-tree", build_aux, dec)
    wres = _stage(
        "weights", assemble_wprime, tree, lifted, aux,
        cycle_cap=cycle_cap, retries=retries,
    )
    pm = _stage("pull-back", build_pullback_map, glued, lifted)
    w_glued = _stage("pull-back", pull_weights, wres.weights, pm)
    w0 = _stage("gadget-pull", pull_through_gadgets, w_glued, gm, g0)
    return PipelineResult(
        g0, tree, gm, dec, lifted, aux, wres, pm, w_glued, w0
    )
