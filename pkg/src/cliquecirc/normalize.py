"""Component-tree normalization.

Three passes establish the shape the weight engine relies on:

1. split_shared_vertices: a vertex lying in several separating sets of one
   node becomes the center of a star whose leaves take over the sets
   (one leaf per set), so that within every node the sets are pairwise
   disjoint.
2. dedupe_separating_sets: a set shared by more than two nodes is replaced
   by a fresh hub node made of one star per set vertex, leaving each
   sharing node its own private copy of the set.
3. enforce_facial_virtual_triangles: in planar nodes every size-3 set must
   bound a face of the embedding; violating nodes are split at the triple.

Passes 1 and 2 rewrite edges, so they return a GadgetMap that lets weight
functions on the rewritten graph pull back to the original one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .decompose import (
    KIND_C,
    KIND_P,
    ComponentNode,
    ComponentTree,
    TreeEdge,
    is_planar,
    validate_component_tree,
)
from .errors import InputError, StructuralError
from .graph import Edge, GADGET, Graph, VIRTUAL, WeightAssignment
from .planar import embed


@dataclass(frozen=True)
class GadgetMap:
    """Maps each pre-rewrite edge id to the directed path of post-rewrite
    edges realizing it, in the stored (u, v) orientation of the pre-edge.

    `paths` values are tuples of (edge id, forward?) pairs.  `provenance`
    maps renamed vertices back to the vertex they replace (absent entries
    are identities).
    """

    paths: dict[str, tuple[tuple[str, bool], ...]]
    provenance: dict[str, str]

    def path(self, eid: str) -> tuple[tuple[str, bool], ...]:
        return self.paths.get(eid, ((eid, True),))

    def origin(self, vertex: str) -> str:
        seen = set()
        while vertex in self.provenance and vertex not in seen:
            seen.add(vertex)
            vertex = self.provenance[vertex]
        return vertex

    def then(self, later: "GadgetMap") -> "GadgetMap":
        paths = {}
        for eid in self.paths:
            out = []
            for pid, fwd in self.paths[eid]:
                step = later.path(pid)
                if fwd:
                    out.extend(step)
                else:
                    out.extend((q, not f) for q, f in reversed(step))
            paths[eid] = tuple(out)
        prov = dict(self.provenance)
        for v, pre in later.provenance.items():
            prov[v] = self.provenance.get(pre, pre)
        return GadgetMap(paths, prov)

    def to_obj(self) -> dict:
        return {
            "paths": {
                eid: [pid for pid, _ in self.paths[eid]]
                for eid in sorted(self.paths)
            },
            "provenance": {
                v: self.provenance[v] for v in sorted(self.provenance)
            },
        }

    @classmethod
    def from_obj(cls, obj, pre: Graph, post: Graph) -> "GadgetMap":
        """Rebuild traversal directions by walking each path in `post`."""
        if not isinstance(obj, dict) or {"paths", "provenance"} - obj.keys():
            raise InputError("gadget map: expected paths/provenance")
        prov = dict(obj["provenance"])

        def origin(v):
            seen = set()
            while v in prov and v not in seen:
                seen.add(v)
                v = prov[v]
            return v

        paths = {}
        for eid, ids in obj["paths"].items():
            if eid not in pre.edges:
                raise InputError(f"gadget map references unknown edge {eid!r}")
            u, v = pre.edges[eid].u, pre.edges[eid].v
            edges = [post.edges[i] for i in ids]
            if len(edges) == 1:
                e = edges[0]
                if origin(e.u) == u and origin(e.v) == v:
                    paths[eid] = ((e.id, True),)
                elif origin(e.u) == v and origin(e.v) == u:
                    paths[eid] = ((e.id, False),)
                else:
                    raise InputError(f"path for {eid!r} does not span its edge")
                continue
            out = []
            cursor = None
            for i, e in enumerate(edges):
                if i == 0:
                    nxt = edges[1]
                    shared = ({e.u, e.v} & {nxt.u, nxt.v}).pop()
                    cursor = e.v if e.u == shared else e.u
                    out.append((e.id, e.u == cursor))
                    cursor = shared
                else:
                    if e.u == cursor:
                        out.append((e.id, True))
                        cursor = e.v
                    elif e.v == cursor:
                        out.append((e.id, False))
                        cursor = e.u
                    else:
                        raise InputError(f"path for {eid!r} is not contiguous")
            start = origin(
                edges[0].u if out[0][1] else edges[0].v
            )
            if (start, origin(cursor)) != (u, v):
                raise InputError(f"path for {eid!r} does not span its edge")
            paths[eid] = tuple(out)
        return cls(paths, prov)


def identity_map(glued: Graph) -> GadgetMap:
    return GadgetMap(
        {eid: ((eid, True),) for eid in sorted(glued.edges)}, {}
    )


def pull_circulation_through_gadget(
    w2: WeightAssignment, m: GadgetMap
) -> WeightAssignment:
    """w1(e) = signed sum of w2 along the path for e."""
    weights = {}
    for eid in sorted(m.paths):
        total = 0
        for pid, fwd in m.paths[eid]:
            val = w2.weights[pid]
            total += val if fwd else -val
        weights[eid] = total
    return WeightAssignment(weights)


class _Names:
    """Fresh vertex and edge names avoiding everything in the tree."""

    def __init__(self, tree: ComponentTree):
        self.vertices = set()
        self.edge_ids = set()
        for n in tree.nodes.values():
            self.vertices |= n.graph.vertices
            self.edge_ids |= set(n.graph.edges)
        self.vcounter = 0
        self.gcounter = 0
        self.wcounter = 0

    def leaf(self, base: str) -> str:
        while True:
            name = f"{base}~{self.vcounter}"
            self.vcounter += 1
            if name not in self.vertices:
                self.vertices.add(name)
                return name

    def gadget_id(self) -> str:
        while True:
            name = f"g{self.gcounter}"
            self.gcounter += 1
            if name not in self.edge_ids:
                self.edge_ids.add(name)
                return name

    def virtual_id(self) -> str:
        while True:
            name = f"virt{self.wcounter}"
            self.wcounter += 1
            if name not in self.edge_ids:
                self.edge_ids.add(name)
                return name


def _copy_tree(t: ComponentTree) -> ComponentTree:
    nodes = {
        nid: ComponentNode(
            n.id, n.kind, n.graph, list(n.separating_sets), n.width, n.beta
        )
        for nid, n in t.nodes.items()
    }
    return ComponentTree(nodes, list(t.edges), t.root)


def _rename_node(node: ComponentNode, mapping: dict[str, str]) -> ComponentNode:
    g = node.graph
    graph = Graph(
        {mapping.get(v, v) for v in g.vertices},
        [
            Edge(e.id, mapping.get(e.u, e.u), mapping.get(e.v, e.v), e.tag)
            for e in g.sorted_edges()
        ],
    )
    sets = [frozenset(mapping.get(v, v) for v in s) for s in node.separating_sets]
    beta = node.beta
    if beta is not None:
        beta = (
            tuple(mapping.get(v, v) for v in beta[0]),
            tuple(tuple(mapping.get(v, v) for v in grp) for grp in beta[1]),
        )
    return ComponentNode(node.id, node.kind, graph, sets, node.width, beta)


def _canon(s: frozenset) -> tuple:
    return tuple(sorted(s))


def _reattach_paths(edges, v, leaf_of, star_of, claim):
    """Rewrite edges at v onto their set's leaf; collect pull-back paths."""
    new_edges = []
    paths = {}
    for e in edges:
        if v not in (e.u, e.v):
            new_edges.append(e)
            continue
        other = e.v if e.u == v else e.u
        s = claim(other)
        if s is None:
            new_edges.append(e)
            continue
        leaf = leaf_of[s]
        new_edges.append(
            Edge(
                e.id,
                leaf if e.u == v else e.u,
                leaf if e.v == v else e.v,
                e.tag,
            )
        )
        if e.tag != VIRTUAL:
            star = star_of[s]
            if e.v == v:
                paths[e.id] = ((e.id, True), (star.id, False))
            else:
                paths[e.id] = ((star.id, True), (e.id, True))
    return new_edges, paths


def _gamma_step(
    tree: ComponentTree, nid: int, v: str, names: _Names
) -> tuple[ComponentTree, GadgetMap]:
    node = tree.nodes[nid]
    svs = sorted({s for s in node.separating_sets if v in s}, key=_canon)
    leaf_of = {s: names.leaf(v) for s in svs}
    star_of = {s: Edge(names.gadget_id(), v, leaf_of[s], GADGET) for s in svs}

    def claim(other):
        for s in svs:
            if other in s:
                return s
        return None

    new_edges, paths = _reattach_paths(
        node.graph.sorted_edges(), v, leaf_of, star_of, claim
    )
    new_edges.extend(star_of[s] for s in svs)
    virtual_pairs = {
        frozenset((e.u, e.v)) for e in new_edges if e.tag == VIRTUAL
    }
    renamed_sets = []
    for s in node.separating_sets:
        if s in svs:
            s2 = frozenset(x if x != v else leaf_of[s] for x in s)
        else:
            s2 = s
        renamed_sets.append(s2)
        for x, y in itertools.combinations(sorted(s2), 2):
            if frozenset((x, y)) not in virtual_pairs:
                e = Edge(names.virtual_id(), x, y, VIRTUAL)
                virtual_pairs.add(frozenset((x, y)))
                new_edges.append(e)
    width = node.width
    if width is not None:
        width += len(svs)
    nodes = dict(tree.nodes)
    nodes[nid] = ComponentNode(
        nid,
        node.kind,
        Graph(set(node.graph.vertices) | set(leaf_of.values()), new_edges),
        renamed_sets,
        width,
        node.beta,
    )

    # rename v in every branch hanging off a set that contains it
    adj: dict[int, list[TreeEdge]] = {}
    for te in tree.edges:
        adj.setdefault(te.a, []).append(te)
        adj.setdefault(te.b, []).append(te)
    branch_of: dict[int, frozenset] = {}
    for te in adj.get(nid, []):
        if v not in te.sep:
            continue
        s = te.sep
        start = te.b if te.a == nid else te.a
        stack = [start]
        while stack:
            cur = stack.pop()
            if cur in branch_of:
                continue
            branch_of[cur] = s
            for ote in adj.get(cur, []):
                for nxt in (ote.a, ote.b):
                    if nxt != nid and nxt not in branch_of:
                        stack.append(nxt)
    for mid, s in sorted(branch_of.items()):
        mnode = nodes[mid]
        if v not in mnode.graph.vertices:
            continue
        mapping = {v: leaf_of[s]}
        for e in mnode.graph.sorted_edges():
            if v in (e.u, e.v) and e.tag != VIRTUAL:
                if e.v == v:
                    paths[e.id] = ((e.id, True), (star_of[s].id, False))
                else:
                    paths[e.id] = ((star_of[s].id, True), (e.id, True))
        nodes[mid] = _rename_node(mnode, mapping)
    new_tree_edges = []
    for te in tree.edges:
        if v in te.sep:
            if nid in (te.a, te.b):
                s = te.sep
            else:
                s = branch_of.get(te.a, branch_of.get(te.b))
                if s is None:
                    raise StructuralError(
                        f"vertex {v!r} appears in a set beyond a separator "
                        "that excludes it"
                    )
            sub = frozenset(x if x != v else leaf_of[s] for x in te.sep)
            new_tree_edges.append(TreeEdge(te.a, te.b, sub))
        else:
            new_tree_edges.append(te)

    step = GadgetMap(paths, {leaf_of[s]: v for s in svs})
    return ComponentTree(nodes, new_tree_edges, tree.root), step


def _find_overlap(tree: ComponentTree) -> tuple[int, str] | None:
    for nid in sorted(tree.nodes):
        node = tree.nodes[nid]
        counts: dict[str, int] = {}
        for s in set(node.separating_sets):
            for v in s:
                counts[v] = counts.get(v, 0) + 1
        hits = sorted(v for v, c in counts.items() if c > 1)
        if hits:
            return nid, hits[0]
    return None


def split_shared_vertices(
    t: ComponentTree,
) -> tuple[ComponentTree, GadgetMap]:
    """Property 1: within each node, separating sets are pairwise disjoint."""
    tree = _copy_tree(t)
    gm = identity_map(tree.glued_graph())
    names = _Names(tree)
    while True:
        hit = _find_overlap(tree)
        if hit is None:
            break
        tree, step = _gamma_step(tree, hit[0], hit[1], names)
        gm = gm.then(step)
    return tree, gm


def _beta_step(
    tree: ComponentTree, s: frozenset, names: _Names
) -> tuple[ComponentTree, GadgetMap]:
    regs = sorted(
        nid for nid, n in tree.nodes.items() if s in n.separating_sets
    )
    k = len(regs)
    centers = sorted(s)
    beta_id = max(tree.nodes) + 1
    leaf = {
        (j, x): names.leaf(x) for j in range(k) for x in centers
    }
    star = {
        (j, x): Edge(names.gadget_id(), x, leaf[(j, x)], GADGET)
        for j in range(k)
        for x in centers
    }

    paths: dict[str, tuple] = {}
    nodes = dict(tree.nodes)
    moved_interior: list[Edge] = []
    for j, nid in enumerate(regs):
        node = nodes[nid]
        kept = []
        for e in node.graph.sorted_edges():
            if (
                e.tag != VIRTUAL
                and e.u in s
                and e.v in s
            ):
                moved_interior.append(e)
            else:
                kept.append(e)
        mapping = {x: leaf[(j, x)] for x in centers}
        for e in kept:
            for x in centers:
                if x in (e.u, e.v) and e.tag != VIRTUAL:
                    if e.v == x:
                        paths[e.id] = ((e.id, True), (star[(j, x)].id, False))
                    else:
                        paths[e.id] = ((star[(j, x)].id, True), (e.id, True))
        stripped = ComponentNode(
            node.id,
            node.kind,
            Graph(node.graph.vertices, kept),
            node.separating_sets,
            node.width,
            node.beta,
        )
        nodes[nid] = _rename_node(stripped, mapping)

    beta_edges: list[Edge] = list(moved_interior)
    for j in range(k):
        for x in centers:
            beta_edges.append(star[(j, x)])
    for x, y in itertools.combinations(centers, 2):
        beta_edges.append(Edge(names.virtual_id(), x, y, VIRTUAL))
    for j in range(k):
        for x, y in itertools.combinations(centers, 2):
            beta_edges.append(
                Edge(names.virtual_id(), leaf[(j, x)], leaf[(j, y)], VIRTUAL)
            )
    groups = tuple(tuple(leaf[(j, x)] for x in centers) for j in range(k))
    beta_vertices = set(centers) | {leaf[key] for key in leaf}
    beta_sets = [
        frozenset(leaf[(j, x)] for x in centers) for j in range(k)
    ]
    nodes[beta_id] = ComponentNode(
        beta_id,
        KIND_C,
        Graph(beta_vertices, beta_edges),
        list(beta_sets),
        2 * len(centers) - 1,
        (tuple(centers), groups),
    )
    for j, nid in enumerate(regs):
        node = nodes[nid]
        sets = [beta_sets[j] if x == s else x for x in node.separating_sets]
        nodes[nid] = ComponentNode(
            node.id, node.kind, node.graph, sets, node.width, node.beta
        )
    new_edges = [te for te in tree.edges if te.sep != s]
    for j, nid in enumerate(regs):
        new_edges.append(TreeEdge(beta_id, nid, beta_sets[j]))
    prov = {leaf[(j, x)]: x for j in range(k) for x in centers}
    step = GadgetMap(paths, prov)
    return ComponentTree(nodes, new_edges, tree.root), step


def dedupe_separating_sets(
    t: ComponentTree,
) -> tuple[ComponentTree, GadgetMap]:
    """Property 2: each separating set is shared by at most two nodes."""
    tree = _copy_tree(t)
    gm = identity_map(tree.glued_graph())
    names = _Names(tree)
    while True:
        counts: dict[frozenset, int] = {}
        for n in tree.nodes.values():
            for s in set(n.separating_sets):
                counts[s] = counts.get(s, 0) + 1
        shared = sorted((s for s, c in counts.items() if c > 2), key=_canon)
        if not shared:
            break
        tree, step = _beta_step(tree, shared[0], names)
        gm = gm.then(step)
    return tree, gm


def _nonfacial_triple(node: ComponentNode) -> frozenset | None:
    """First size-3 set whose triangle bounds no face of the node.

    Parallel copies of a pair are interchangeable in an embedding, so a
    face is compared by its boundary's endpoint pairs, not by edge ids.
    """
    triples = sorted(
        (s for s in node.separating_sets if len(s) == 3), key=_canon
    )
    if not triples:
        return None
    emb = embed(node.graph)
    for s in triples:
        pairs = {
            frozenset(p) for p in itertools.combinations(sorted(s), 2)
        }
        for x, y in itertools.combinations(sorted(s), 2):
            if not any(
                e.tag == VIRTUAL and {e.u, e.v} == {x, y}
                for e in node.graph.edges.values()
            ):
                raise StructuralError(
                    f"set {sorted(s)} lacks a full virtual triangle"
                )
        if not any(
            len(f) == 3
            and {
                frozenset((node.graph.edges[d.edge_id].u,
                           node.graph.edges[d.edge_id].v))
                for d in f.boundary
            }
            == pairs
            for f in emb.faces
        ):
            return s
    return None


def _split_node_at(
    tree: ComponentTree, nid: int, s: frozenset, names: _Names
) -> ComponentTree:
    node = tree.nodes[nid]
    adj = {v: set() for v in node.graph.vertices}
    for e in node.graph.edges.values():
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)
    comps = []
    seen: set[str] = set()
    for v in sorted(node.graph.vertices - s):
        if v in seen:
            continue
        comp = set()
        stack = [v]
        while stack:
            cur = stack.pop()
            if cur in comp:
                continue
            comp.add(cur)
            stack.extend(w for w in adj[cur] if w not in s and w not in comp)
        seen |= comp
        comps.append(frozenset(comp))
    comps.sort(key=min)
    if len(comps) < 2:
        raise StructuralError(
            f"virtual triangle {sorted(s)} is not a face and does not "
            "separate its node",
            witness=sorted(s),
        )
    inside = [
        e for e in node.graph.sorted_edges() if e.u in s and e.v in s
    ]
    side_ids = [nid] + [
        max(tree.nodes) + 1 + i for i in range(len(comps) - 1)
    ]
    new_nodes = dict(tree.nodes)
    set_home: dict[frozenset, int] = {}
    for i, comp in enumerate(comps):
        keep = comp | s
        edges = [
            e
            for e in node.graph.sorted_edges()
            if e.u in keep and e.v in keep and not (e.u in s and e.v in s)
        ]
        if i == 0:
            edges.extend(inside)
        pairs = {
            frozenset((e.u, e.v)) for e in edges if e.tag == VIRTUAL
        }
        for x, y in itertools.combinations(sorted(s), 2):
            if frozenset((x, y)) not in pairs:
                edges.append(Edge(names.virtual_id(), x, y, VIRTUAL))
        side_graph = Graph(keep, edges)
        if not is_planar(side_graph):
            raise StructuralError(
                f"side of virtual triangle {sorted(s)} is not planar"
            )
        sets = [s]
        for other in node.separating_sets:
            if other == s:
                continue
            if other <= keep and set_home.get(other) is None:
                sets.append(other)
                set_home[other] = side_ids[i]
        new_nodes[side_ids[i]] = ComponentNode(
            side_ids[i], KIND_P, side_graph, sets, None, None
        )
    new_edges = []
    for te in tree.edges:
        if nid not in (te.a, te.b):
            new_edges.append(te)
            continue
        home = side_ids[0] if te.sep == s else set_home.get(te.sep)
        if home is None:
            raise StructuralError(
                f"set {sorted(te.sep)} lost its node after a facial split"
            )
        a = home if te.a == nid else te.a
        b = home if te.b == nid else te.b
        new_edges.append(TreeEdge(a, b, te.sep))
    for other_id in side_ids[1:]:
        new_edges.append(TreeEdge(side_ids[0], other_id, s))
    root = tree.root
    return ComponentTree(new_nodes, new_edges, root)


def enforce_facial_virtual_triangles(t: ComponentTree) -> ComponentTree:
    """Property 3: in planar nodes, size-3 sets bound faces; split if not."""
    tree = _copy_tree(t)
    names = _Names(tree)
    for _ in range(200):
        hit = None
        for nid in sorted(tree.nodes):
            node = tree.nodes[nid]
            if node.kind != KIND_P:
                continue
            s = _nonfacial_triple(node)
            if s is not None:
                hit = (nid, s)
                break
        if hit is None:
            return tree
        tree = _split_node_at(tree, hit[0], hit[1], names)
    raise StructuralError("facial enforcement did not converge")


def check_properties(tree: ComponentTree) -> None:
    """Raise unless Properties 1 and 2 hold."""
    for nid in sorted(tree.nodes):
        node = tree.nodes[nid]
        distinct = sorted(set(node.separating_sets), key=_canon)
        for s1, s2 in itertools.combinations(distinct, 2):
            if s1 & s2:
                raise StructuralError(
                    f"sets {sorted(s1)} and {sorted(s2)} overlap in node {nid}"
                )
    counts: dict[frozenset, int] = {}
    for n in tree.nodes.values():
        for s in set(n.separating_sets):
            counts[s] = counts.get(s, 0) + 1
    for s, c in counts.items():
        if c > 2:
            raise StructuralError(
                f"set {sorted(s)} is shared by {c} nodes"
            )


def _tree_signature(tree: ComponentTree) -> tuple:
    return tuple(
        (
            nid,
            tuple(sorted(node.graph.vertices)),
            tuple(sorted(tuple(sorted(s)) for s in node.separating_sets)),
        )
        for nid, node in sorted(tree.nodes.items())
    )


def normalize(t: ComponentTree) -> tuple[ComponentTree, GadgetMap]:
    """Run all three passes to a fixed point and validate the result.

    Facial splitting must come first in each round: splitting a vertex
    whose set triangle bounds no face can destroy planarity, because the
    re-attached edge groups are only guaranteed to occupy consecutive
    arcs of the vertex's rotation once the triangle is facial.
    """
    tree = _copy_tree(t)
    gm = identity_map(tree.glued_graph())
    for _ in range(50):
        before = _tree_signature(tree)
        tree = enforce_facial_virtual_triangles(tree)
        tree, m1 = split_shared_vertices(tree)
        gm = gm.then(m1)
        tree, m2 = dedupe_separating_sets(tree)
        gm = gm.then(m2)
        if _tree_signature(tree) == before:
            break
    else:
        raise StructuralError("normalization did not converge")
    check_properties(tree)
    validate_component_tree(tree)
    return tree, gm
