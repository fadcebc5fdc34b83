"""Combinatorial planar embeddings, face enumeration, and conversion of
face weights into edge weights.

The embedding is a rotation system: for every vertex, the cyclic order of
incident edge stubs.  Faces are the orbits of the usual next-half-edge
rule.  Face weights become edge weights through a spanning tree of the
dual graph rooted at the outer face; edges outside the tree carry zero,
which is what lets us force chosen edges (virtual chords) to zero by
keeping their duals out of the tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import networkx as nx

from .errors import InputError, StructuralError
from .graph import DirectedEdge, Graph


@dataclass(frozen=True)
class Face:
    index: int
    boundary: tuple[DirectedEdge, ...]

    @property
    def edge_ids(self) -> frozenset[str]:
        return frozenset(d.edge_id for d in self.boundary)

    def __len__(self) -> int:
        return len(self.boundary)


class Embedding:
    """A planar rotation system over a (multi)graph, with its faces.

    ``rotations[v]`` lists the incident edge ids of v in cyclic order.
    The face count is checked against Euler's formula, so a rotation
    system that does not describe a sphere embedding is rejected.
    """

    def __init__(self, graph: Graph, rotations: Mapping[str, Sequence[str]]) -> None:
        self.graph = graph
        self.rotations = {v: tuple(rotations[v]) for v in sorted(graph.vertices)}
        for v, rot in self.rotations.items():
            expect = sorted(eid for _, eid in graph.adjacency[v])
            if sorted(rot) != expect:
                raise InputError(f"rotation at {v!r} does not list its incident edges")
        self.faces: list[Face] = self._trace_faces()
        if graph.num_vertices - graph.num_edges + len(self.faces) != 2:
            raise StructuralError(
                "rotation system is not a sphere embedding "
                f"(V={graph.num_vertices} E={graph.num_edges} F={len(self.faces)})"
            )
        self.outer = self._pick_outer()

    # half-edge (eid, forward) runs tail -> head per the stored edge order
    def _next_half_edge(self, h: DirectedEdge) -> DirectedEdge:
        e = self.graph.edges[h.edge_id]
        head = e.v if h.forward else e.u
        rot = self.rotations[head]
        i = rot.index(h.edge_id)
        nxt = rot[i - 1]  # predecessor in clockwise order
        ne = self.graph.edges[nxt]
        return DirectedEdge(nxt, ne.u == head)

    def _trace_faces(self) -> list[Face]:
        half_edges = []
        for eid in sorted(self.graph.edges):
            half_edges.append(DirectedEdge(eid, True))
            half_edges.append(DirectedEdge(eid, False))
        seen: set[DirectedEdge] = set()
        faces: list[Face] = []
        for start in half_edges:
            if start in seen:
                continue
            walk = [start]
            seen.add(start)
            cur = self._next_half_edge(start)
            while cur != start:
                walk.append(cur)
                seen.add(cur)
                cur = self._next_half_edge(cur)
            # canonical rotation: begin at the smallest half-edge
            k = walk.index(min(walk))
            walk = walk[k:] + walk[:k]
            faces.append(Face(len(faces), tuple(walk)))
        return faces

    def _pick_outer(self) -> int:
        # longest boundary; ties broken by the canonical boundary tuple
        longest = max(len(f.boundary) for f in self.faces)
        cands = [f for f in self.faces if len(f.boundary) == longest]
        return min(cands, key=lambda f: f.boundary).index

    @cached_property
    def face_of_half_edge(self) -> dict[DirectedEdge, int]:
        out: dict[DirectedEdge, int] = {}
        for f in self.faces:
            for h in f.boundary:
                out[h] = f.index
        return out

    def flanks(self, eid: str) -> tuple[int, int]:
        """Face indices on the two sides of an edge (equal for a bridge)."""
        fo = self.face_of_half_edge
        return fo[DirectedEdge(eid, True)], fo[DirectedEdge(eid, False)]

    def bounded_faces(self) -> list[Face]:
        return [f for f in self.faces if f.index != self.outer]


def embed(graph: Graph) -> Embedding:
    """Planar-embed a connected multigraph deterministically.

    The simple support is embedded first; parallel edges are then spliced
    in next to each other (ascending ids at the lower-named endpoint,
    descending at the other, which keeps the rotation system spherical).
    """
    if graph.num_vertices == 0:
        raise InputError("cannot embed the empty graph")
    if not graph.is_connected():
        raise StructuralError("embedding requires a connected graph")
    support = nx.Graph()
    support.add_nodes_from(sorted(graph.vertices))
    for e in graph.sorted_edges():
        support.add_edge(e.u, e.v)
    ok, cert = nx.check_planarity(support, counterexample=True)
    if not ok:
        raise StructuralError(
            "graph is not planar", witness=sorted(cert.nodes)
        )
    rotations: dict[str, tuple[str, ...]] = {}
    for v in sorted(graph.vertices):
        stubs: list[str] = []
        if support.degree(v):
            for nbr in cert.neighbors_cw_order(v):
                group = graph.edges_between(v, nbr)
                if v > nbr:
                    group = group[::-1]
                stubs.extend(group)
        rotations[v] = tuple(stubs)
    return Embedding(graph, rotations)


def boundary_sum(face: Face, weights: Mapping[str, int]) -> int:
    total = 0
    for d in face.boundary:
        w = weights.get(d.edge_id, 0)
        total += w if d.forward else -w
    return total


def faces_to_edges(
    emb: Embedding,
    masses: Mapping[int, int],
    locked: frozenset[str] = frozenset(),
) -> dict[str, int]:
    """Edge weights whose per-face boundary sums equal the given masses.

    ``masses`` maps bounded face indices to target sums (missing faces
    get zero).  ``locked`` edges are guaranteed weight zero: the dual
    spanning tree is built from the outer face without crossing them.
    Every face's realized sum is re-checked afterwards; a mass that
    cannot be realized under the locks raises StructuralError.
    """
    if emb.outer in masses:
        raise InputError("outer face cannot carry a mass")

    # dual BFS from the outer face over unlocked, non-bridge edges
    parent_edge: dict[int, str] = {}
    parent_face: dict[int, int] = {}
    order: list[int] = [emb.outer]
    seen = {emb.outer}
    qi = 0
    while qi < len(order):
        f = order[qi]
        qi += 1
        for d in sorted(emb.faces[f].boundary):
            eid = d.edge_id
            if eid in locked:
                continue
            a, b = emb.flanks(eid)
            other = b if a == f else a
            if other == f or other in seen:
                continue
            seen.add(other)
            parent_edge[other] = eid
            parent_face[other] = f
            order.append(other)

    children: dict[int, list[int]] = {f.index: [] for f in emb.faces}
    for f, p in parent_face.items():
        children[p].append(f)

    subtotal: dict[int, int] = {}
    for f in reversed(order):
        subtotal[f] = masses.get(f, 0) + sum(subtotal[c] for c in children[f])

    weights: dict[str, int] = {eid: 0 for eid in emb.graph.edges}
    fo = emb.face_of_half_edge
    for f in order:
        if f == emb.outer:
            continue
        eid = parent_edge[f]
        # orient so that this edge's contribution to f's boundary is subtotal[f]
        if fo[DirectedEdge(eid, True)] == f:
            weights[eid] = subtotal[f]
        else:
            weights[eid] = -subtotal[f]

    for face in emb.faces:
        want = -sum(masses.values()) if face.index == emb.outer else masses.get(face.index, 0)
        got = boundary_sum(face, weights)
        if got != want:
            raise StructuralError(
                f"face {face.index} realizes boundary sum {got}, needs {want} "
                "(mass unreachable under locked edges)",
                witness=sorted(face.edge_ids),
            )
    return weights
