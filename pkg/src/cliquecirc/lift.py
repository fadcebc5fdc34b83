"""The lifted graph: one copy of each vertex per bag that holds it.

Every glued edge appears exactly once, placed at the highest bag containing
both endpoints; a copy edge ties the two copies of a vertex shared by a bag
and its parent.  Cycles of the glued graph correspond to cycles here whose
projection forgets the bag coordinates, and every lifted edge is associated
with one bag, which is where it will be weighted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InputError
from .graph import DirectedEdge, Edge, GADGET, Graph
from .treedec import TreeDecomp

COPY_PREFIX = "cp:"


def copy_edge_id(v: str, parent: str, child: str) -> str:
    return f"{COPY_PREFIX}{v}:{parent}:{child}"


@dataclass
class LiftedGraph:
    graph: Graph
    dec: TreeDecomp
    assoc: dict[str, str]      # lifted edge id -> bag id weighted there
    intra_of: dict[str, str]   # glued edge id -> its lifted copy

    def bag_edges(self, bag_id: str) -> list[str]:
        return sorted(e for e, b in self.assoc.items() if b == bag_id)

    def project_vertex(self, lifted_vertex: str) -> str:
        return lifted_vertex.rsplit("@", 1)[0]

    def project_edge(self, lifted_eid: str) -> str | None:
        """Glued edge id of an intra copy; None for copy edges."""
        if lifted_eid.startswith(COPY_PREFIX):
            return None
        return lifted_eid.rsplit("@", 1)[0]


def check_connected_support(
    lifted: LiftedGraph, cycle: Sequence[DirectedEdge]
) -> bool:
    """True iff the bags holding the cycle's edges induce a connected
    subtree of the bag tree."""
    bags = {lifted.assoc[d.edge_id] for d in cycle}
    if not bags:
        return True
    dec = lifted.dec
    start = min(bags)
    seen = {start}
    stack = [start]
    while stack:
        b = stack.pop()
        for nb in [dec.parent[b], *dec.children(b)]:
            if nb in bags and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return seen == bags


def lift(glued: Graph, dec: TreeDecomp) -> LiftedGraph:
    for v in glued.vertices:
        if "@" in v:
            raise InputError(f"vertex name {v!r} may not contain '@'")
    vertices = {
        f"{v}@{bid}"
        for bid, bag in dec.bags.items()
        for v in bag.vertices
    }
    edges: list[Edge] = []
    assoc: dict[str, str] = {}
    intra_of: dict[str, str] = {}
    for eid in sorted(glued.edges):
        e = glued.edges[eid]
        home = dec.highest_bag_with_pair(e.u, e.v)
        lifted = Edge(f"{eid}@{home}", f"{e.u}@{home}", f"{e.v}@{home}", e.tag)
        edges.append(lifted)
        assoc[lifted.id] = home
        intra_of[eid] = lifted.id
    for child in sorted(dec.bags):
        parent = dec.parent[child]
        if parent is None:
            continue
        for v in sorted(dec.shared_with_parent(child)):
            cid = copy_edge_id(v, parent, child)
            edges.append(Edge(cid, f"{v}@{parent}", f"{v}@{child}", GADGET))
            assoc[cid] = parent
    return LiftedGraph(Graph(vertices, edges), dec, assoc, intra_of)
