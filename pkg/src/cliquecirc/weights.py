"""Edge weights on the lifted graph with nonzero circulation on every cycle.

Two layers, radix-combined.  The cross layer settles cycles spanning
several bags: in a planar bag, the bounded faces bordering a separating
set's virtual chords receive masses scaled by the attached subtree's
height and leaf count from the centroid recursion, and a small-width
bag hands its edges distinct powers of two under the same scaling.  The
highest bag a cycle visits then outweighs everything below it.  The
local layer gives each planar bag's bounded faces unit weight, which
covers the cycles confined to a single bag.  The shift base exceeds any
cycle's possible local sum, so the layers cannot interfere.

The separating-set chords themselves are embedded but locked to weight
zero; they exist so the face structure knows where the sets sit, and
they never reach the lifted graph.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Iterable, Sequence

from .auxtree import Attachment, AuxTree
from .decompose import ComponentTree
from .errors import InputError, StructuralError
from .graph import (
    VIRTUAL,
    Cycle,
    Edge,
    Graph,
    WeightAssignment,
    circulation,
    enumerate_simple_cycles,
)
from .lift import LiftedGraph
from .planar import Embedding, embed, faces_to_edges


@dataclass
class WeightParams:
    """Instance-wide constants of the weighting scheme.

    m is the largest number of edges associated with any small-width
    bag; K must clear both the subset-sum headroom 2^(m+2) and the
    constant 7 that bounds how many faces a separating set can touch.
    b_shift is filled in once the local layer is known.
    """

    m: int
    K: int
    b_shift: int | None = None


def choose_K(lifted: LiftedGraph) -> WeightParams:
    """Smallest legal K for this instance, recorded in the manifest."""
    m = 0
    for bid in sorted(lifted.dec.bags):
        if lifted.dec.bags[bid].origin[0] == "c":
            m = max(m, len(lifted.bag_edges(bid)))
    return WeightParams(m, max(2 ** (m + 2), 7) + 1)


def csize_weights(
    lifted: LiftedGraph, aux: AuxTree, bag_id: str, params: WeightParams
) -> dict[str, int]:
    """Distinct powers of two on a small-width bag's associated edges.

    Any nonempty subset with any signs sums to something nonzero, and
    the common K^(h-1) * leaves factor slots the bag into the
    cross-layer hierarchy.  Copy edges count like any other edge here.
    """
    ids = lifted.bag_edges(bag_id)
    if len(ids) > params.m:
        raise InputError(
            f"bag {bag_id!r} has {len(ids)} associated edges, above m = {params.m}"
        )
    scale = params.K ** (aux.height(bag_id) - 1) * aux.leaves(bag_id)
    return {eid: 2 ** (j + 1) * scale for j, eid in enumerate(ids)}


@dataclass
class BagEmbedding:
    """A planar bag's analysis embedding.

    The embedded graph holds the bag's associated intra edges under
    their original ids plus the owning component's virtual chords.
    Chord ids are locked: they always carry weight zero.
    """

    emb: Embedding
    locked: frozenset[str]
    to_lifted: dict[str, str]   # analysis edge id -> lifted edge id


def _make_virtual_triangles_facial(
    emb: Embedding, sets: Iterable[frozenset[str]]
) -> Embedding:
    """Re-splice parallel stacks until every size-3 set's chords bound a face.

    A mass assignment that keeps the chords at zero exists only when no
    closed curve of chords encloses mass.  Sets are pairwise disjoint,
    so the only such curves are the per-set virtual triangles; pinning
    each one to an empty face removes every obstruction.  Any embedding
    holds a face whose boundary runs through the three vertex pairs of
    a non-separating triangle; if that face uses real copies, swapping
    each one with its parallel virtual copy (at both endpoints, a valid
    rearrangement of the parallel stack) turns it into the chord face.
    """
    graph = emb.graph
    triangles: list[tuple[frozenset[str], frozenset[str]]] = []
    swaps: list[tuple[str, str]] = []
    for s in sorted(sets, key=sorted):
        if len(s) != 3:
            continue
        chord_of: dict[frozenset[str], str] = {}
        for e in graph.edges_with_tag(VIRTUAL):
            if {e.u, e.v} <= s:
                chord_of[frozenset((e.u, e.v))] = e.id
        if len(chord_of) != 3:
            raise StructuralError(
                "size-3 set lacks a full virtual triangle", witness=sorted(s)
            )
        triangles.append((s, frozenset(chord_of.values())))
        face = None
        for f in emb.faces:
            if len(f.boundary) != 3:
                continue
            fp = {
                frozenset((graph.edges[d.edge_id].u, graph.edges[d.edge_id].v))
                for d in f.boundary
            }
            if fp == set(chord_of):
                face = f
                break
        if face is None:
            raise StructuralError(
                "set's triangle bounds no face in this embedding",
                witness=sorted(s),
            )
        for d in face.boundary:
            e = graph.edges[d.edge_id]
            want = chord_of[frozenset((e.u, e.v))]
            if want != e.id:
                swaps.append((e.id, want))
    if swaps:
        rotations = {v: list(rot) for v, rot in emb.rotations.items()}
        for old, new in swaps:
            e = graph.edges[old]
            for v in (e.u, e.v):
                rot = rotations[v]
                i, j = rot.index(old), rot.index(new)
                rot[i], rot[j] = rot[j], rot[i]
        emb = Embedding(graph, rotations)
    for s, chords in triangles:
        if not any(f.edge_ids == chords for f in emb.faces):
            raise StructuralError(
                "virtual triangle still not facial after re-splicing",
                witness=sorted(s),
            )
    return emb


def _unlocked_outer(emb: Embedding, locked: frozenset[str]) -> Embedding:
    """Re-pick the outer face when the default is bounded by locks only.

    The mass realization walks the dual from the outer face without
    crossing locked edges; an all-locked outer boundary would strand it
    on the very first step.  Happens when a piece is a wheel over its
    virtual triangle and nothing else, so the triangle face has the
    lexicographically smallest boundary.
    """
    if not emb.faces[emb.outer].edge_ids <= locked:
        return emb
    free = [f for f in emb.faces if not f.edge_ids <= locked]
    if not free:
        return emb
    longest = max(len(f.boundary) for f in free)
    pick = min(
        (f for f in free if len(f.boundary) == longest),
        key=lambda f: f.boundary,
    )
    out = copy.copy(emb)
    out.outer = pick.index
    return out


def analysis_embedding(
    tree: ComponentTree, lifted: LiftedGraph, bag_id: str
) -> BagEmbedding | None:
    """Embed the subgraph a planar bag is responsible for.

    Edges whose endpoints both lie in the parent's separating set are
    associated higher up and stay out; edges a neighboring component
    contributed inside a shared set come in because they are associated
    here.  Returns None for an edgeless bag, which has no cycles to
    worry about.
    """
    bag = lifted.dec.bags[bag_id]
    if bag.origin[0] != "p":
        raise InputError(f"bag {bag_id!r} is not a planar bag")
    node = tree.nodes[bag.origin[1]]
    edges: list[Edge] = []
    to_lifted: dict[str, str] = {}
    for lid in lifted.bag_edges(bag_id):
        pid = lifted.project_edge(lid)
        if pid is None:
            continue        # copy edges run between bags, not inside one
        le = lifted.graph.edges[lid]
        edges.append(
            Edge(
                pid,
                lifted.project_vertex(le.u),
                lifted.project_vertex(le.v),
                le.tag,
            )
        )
        to_lifted[pid] = lid
    locked = []
    for e in node.graph.edges_with_tag(VIRTUAL):
        edges.append(e)
        locked.append(e.id)
    if not edges:
        return None
    emb = _make_virtual_triangles_facial(
        embed(Graph(node.graph.vertices, edges)), set(node.separating_sets)
    )
    emb = _unlocked_outer(emb, frozenset(locked))
    return BagEmbedding(emb, frozenset(locked), to_lifted)


@dataclass(frozen=True)
class FaceWeighting:
    """Cross-layer face masses for one planar bag.

    over_limit lists separating sets that ended up bordering more than
    three weightable faces; the exact per-cycle bound checks still
    decide correctness, this is surfaced so odd embeddings are visible.
    """

    masses: dict[int, int]
    over_limit: tuple[tuple[str, int], ...]


def planar_cross_weights(
    be: BagEmbedding, attachments: Sequence[Attachment], K: int
) -> FaceWeighting:
    """Face masses recording which recursion subtrees attach where.

    Every bounded face bordering a chord of an attachment's separating
    set gains twice that subtree's K^height * leaves figure; a face hit
    through several sets gets the sum.  A bag whose recursion piece is
    just itself has no attachments and keeps all faces at zero.  Faces
    bounded entirely by chords stay massless, the locks make any other
    choice unrealizable.
    """
    emb = be.emb
    masses: dict[int, int] = {}
    audit: list[tuple[str, int]] = []
    for att in attachments:
        if att.sep is None:
            raise StructuralError(
                "a planar bag's tree edges must carry their separating sets"
            )
        if len(att.sep) < 2:
            # a simple cycle cannot cross a one-vertex set twice
            continue
        chords = {
            eid
            for eid in be.locked
            if {emb.graph.edges[eid].u, emb.graph.edges[eid].v} <= att.sep
        }
        if not chords:
            raise StructuralError(
                "separating set has no chords in its bag's embedding",
                witness=sorted(att.sep),
            )
        usable = {
            v
            for v in att.sep
            for _, eid in emb.graph.adjacency[v]
            if eid not in chords
        }
        if len(usable) < 2:
            # an excursion enters and leaves through two distinct set
            # vertices, each needing a non-chord edge here; without
            # them no cycle visits this bag through the set
            continue
        hit = [
            f.index
            for f in emb.faces
            if f.index != emb.outer
            and f.edge_ids & chords
            and not f.edge_ids <= be.locked
        ]
        if not hit:
            raise StructuralError(
                "no weightable face borders this separating set",
                witness=sorted(att.sep),
            )
        if len(hit) > 3:
            audit.append(("/".join(sorted(att.sep)), len(hit)))
        mass = 2 * K ** att.height * att.leaves
        for fi in hit:
            masses[fi] = masses.get(fi, 0) + mass
    return FaceWeighting(masses, tuple(audit))


def planar_local_weights(be: BagEmbedding) -> dict[str, int]:
    """Unit mass per bounded face, realized on the bag's own edges.

    A cycle's circulation under these weights counts its enclosed
    faces, so no cycle confined to the bag can sum to zero.  All-chord
    faces stay massless; no cycle of the lifted graph can enclose only
    those without also enclosing a face that touches its own edges.
    """
    masses = {
        f.index: 1
        for f in be.emb.faces
        if f.index != be.emb.outer and not f.edge_ids <= be.locked
    }
    return faces_to_edges(be.emb, masses, be.locked)


def _layers(
    tree: ComponentTree,
    lifted: LiftedGraph,
    aux: AuxTree,
    params: WeightParams,
) -> tuple[dict[str, int], dict[str, int], tuple[tuple[str, str, int], ...]]:
    """Cross and local weight layers over every lifted edge id."""
    cross: dict[str, int] = {}
    local: dict[str, int] = {}
    audit: list[tuple[str, str, int]] = []
    for bid in sorted(lifted.dec.bags):
        if lifted.dec.bags[bid].origin[0] == "c":
            cross.update(csize_weights(lifted, aux, bid, params))
            continue
        be = analysis_embedding(tree, lifted, bid)
        if be is None:
            continue
        fw = planar_cross_weights(be, aux.nodes[bid].attachments, params.K)
        wc = faces_to_edges(be.emb, fw.masses, be.locked)
        wl = planar_local_weights(be)
        for pid, lid in sorted(be.to_lifted.items()):
            cross[lid] = wc[pid]
            local[lid] = wl[pid]
        audit.extend((bid, label, count) for label, count in fw.over_limit)
    # everything untouched, copy edges at planar bags included, stays 0
    for lid in lifted.graph.edges:
        cross.setdefault(lid, 0)
        local.setdefault(lid, 0)
    return cross, local, tuple(audit)


@dataclass
class WeightsResult:
    weights: WeightAssignment
    cross: WeightAssignment
    local: WeightAssignment
    params: WeightParams
    face_audit: tuple[tuple[str, str, int], ...]
    doublings: int

    def manifest_obj(self) -> dict:
        return {
            "K": self.params.K,
            "B_shift": str(self.params.b_shift),
            "m": self.params.m,
            "weights": {eid: str(w) for eid, w in self.weights.items()},
            "max_bits": self.weights.max_bits(),
        }


def assemble_wprime(
    tree: ComponentTree,
    lifted: LiftedGraph,
    aux: AuxTree,
    params: WeightParams | None = None,
    cycle_cap: int = 2_000_000,
    retries: int = 3,
) -> WeightsResult:
    """Combine the layers and prove the result on the instance itself.

    Every simple cycle of the lifted graph is enumerated and its
    circulation checked.  A zero witness triggers a retry with K and
    the shift base doubled; a witness that survives all retries is
    raised.  The guard exists to surface corner cases, not to hide
    them: on the instances this library targets it should never fire.
    """
    if params is None:
        params = choose_K(lifted)
    cycles = enumerate_simple_cycles(lifted.graph, cap=cycle_cap)
    n = lifted.graph.num_vertices
    witness: Cycle | None = None
    boost = 1
    for attempt in range(retries + 1):
        p = WeightParams(params.m, params.K * boost)
        cross, local, audit = _layers(tree, lifted, aux, p)
        local_peak = max((abs(w) for w in local.values()), default=0)
        p.b_shift = max(n * local_peak + 1, 2) * boost
        combined = WeightAssignment(
            {eid: p.b_shift * cross[eid] + local[eid] for eid in sorted(cross)}
        )
        witness = next((c for c in cycles if circulation(c, combined) == 0), None)
        if witness is None:
            return WeightsResult(
                combined,
                WeightAssignment(cross),
                WeightAssignment(local),
                p,
                audit,
                attempt,
            )
        boost *= 2
    raise StructuralError(
        "a cycle still has zero circulation after doubling retries",
        witness=[d.edge_id for d in witness],
    )


def bag_portions(
    cycle: Cycle, lifted: LiftedGraph, weights: WeightAssignment
) -> dict[str, int]:
    """Signed contribution of a cycle's edges, split by associated bag."""
    out: dict[str, int] = {}
    for d in cycle:
        b = lifted.assoc[d.edge_id]
        out[b] = out.get(b, 0) + weights.of(d)
    return out


def audit_subtree_bound(
    lifted: LiftedGraph,
    aux: AuxTree,
    cross: WeightAssignment,
    params: WeightParams,
    cycles: Iterable[Cycle],
) -> list[dict]:
    """Per cycle and per recursion subtree, the cross portion must stay
    strictly under K^height * leaves of the subtree's root."""
    bad: list[dict] = []
    for ci, cycle in enumerate(cycles):
        portions = bag_portions(cycle, lifted, cross)
        for b in sorted(aux.nodes):
            sub = aux.subtree_bags(b)
            got = sum(v for bag, v in portions.items() if bag in sub)
            bound = params.K ** aux.height(b) * aux.leaves(b)
            if abs(got) >= bound:
                bad.append(
                    {"cycle": ci, "subtree": b, "portion": got, "bound": bound}
                )
    return bad


def audit_highest_bag_dominance(
    lifted: LiftedGraph,
    aux: AuxTree,
    cross: WeightAssignment,
    cycles: Iterable[Cycle],
) -> list[dict]:
    """For a cycle touching several bags, one bag must sit above the
    others in the centroid tree and its cross portion must outweigh the
    rest combined."""
    bad: list[dict] = []
    for ci, cycle in enumerate(cycles):
        portions = bag_portions(cycle, lifted, cross)
        if len(portions) < 2:
            continue
        used = set(portions)
        tops = [b for b in sorted(used) if used <= aux.subtree_bags(b)]
        if len(tops) != 1:
            bad.append(
                {"cycle": ci, "reason": "no single highest bag", "bags": sorted(used)}
            )
            continue
        top = tops[0]
        rest = sum(v for b, v in portions.items() if b != top)
        if abs(portions[top]) <= abs(rest):
            bad.append(
                {
                    "cycle": ci,
                    "highest": top,
                    "portion": portions[top],
                    "rest": rest,
                }
            )
    return bad
