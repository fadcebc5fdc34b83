"""Component trees: splitting a graph into planar and small-treewidth
pieces glued along shared vertex sets of size at most three.

The splitter is brute force and maximal: at every level it takes the
lexicographically smallest vertex set of size 2 or 3 whose removal
disconnects the piece and whose resulting sides can all themselves be
decomposed, recursing until no such set exists.  Both sides of a split
receive the set as a clique of virtual edges; real edges lying inside
the set stay with the first side only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import networkx as nx

from .errors import InputError, StructuralError
from .graph import Edge, Graph, VIRTUAL
from .jsonio import graph_from_obj, graph_to_obj
from .treedec import MAX_EXACT, treewidth_exact

KIND_P = "p-type"
KIND_C = "c-type"


@dataclass
class ComponentNode:
    id: int
    kind: str
    graph: Graph
    separating_sets: list[frozenset[str]] = field(default_factory=list)
    width: int | None = None
    # (centers, leaf_groups) when the node is a sharing-split hub with a
    # closed-form decomposition
    beta: tuple | None = None


@dataclass(frozen=True)
class TreeEdge:
    a: int
    b: int
    sep: frozenset[str]


@dataclass
class ComponentTree:
    nodes: dict[int, ComponentNode]
    edges: list[TreeEdge]
    root: int

    def neighbors(self, nid: int) -> list[tuple[int, frozenset[str]]]:
        out = []
        for te in self.edges:
            if te.a == nid:
                out.append((te.b, te.sep))
            elif te.b == nid:
                out.append((te.a, te.sep))
        return sorted(out, key=lambda t: (t[0], sorted(t[1])))

    def glued_graph(self, bipartition=None) -> Graph:
        vertices: set[str] = set()
        edges: dict[str, Edge] = {}
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            vertices |= node.graph.vertices
            for e in node.graph.sorted_edges():
                if e.tag == VIRTUAL:
                    continue
                if e.id in edges:
                    raise StructuralError(
                        f"edge {e.id!r} appears in more than one component"
                    )
                edges[e.id] = e
        return Graph(vertices, edges.values(), bipartition)

    def to_obj(self) -> dict:
        nodes = []
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            obj = {
                "id": n.id,
                "kind": n.kind,
                "graph": graph_to_obj(n.graph),
                "separating_sets": [sorted(s) for s in n.separating_sets],
            }
            if n.width is not None:
                obj["width"] = n.width
            if n.beta is not None:
                obj["beta"] = {
                    "centers": list(n.beta[0]),
                    "groups": [list(g) for g in n.beta[1]],
                }
            nodes.append(obj)
        edges = []
        for te in sorted(self.edges, key=lambda t: (t.a, t.b, sorted(t.sep))):
            sep_index = self.nodes[te.a].separating_sets.index(te.sep)
            edges.append({"a": te.a, "b": te.b, "sep_index": sep_index})
        return {"nodes": nodes, "edges": edges, "root": self.root}

    @classmethod
    def from_obj(cls, obj) -> "ComponentTree":
        if not isinstance(obj, dict) or {"nodes", "edges", "root"} - obj.keys():
            raise InputError("component tree: expected nodes/edges/root")
        nodes: dict[int, ComponentNode] = {}
        for no in obj["nodes"]:
            beta = None
            if no.get("beta") is not None:
                beta = (
                    tuple(no["beta"]["centers"]),
                    tuple(tuple(g) for g in no["beta"]["groups"]),
                )
            nodes[no["id"]] = ComponentNode(
                no["id"],
                no["kind"],
                graph_from_obj(no["graph"]),
                [frozenset(s) for s in no["separating_sets"]],
                no.get("width"),
                beta,
            )
        edges = []
        for eo in obj["edges"]:
            sep = nodes[eo["a"]].separating_sets[eo["sep_index"]]
            edges.append(TreeEdge(eo["a"], eo["b"], sep))
        return cls(nodes, edges, obj["root"])


def _support_components(vertices: Iterable[str], adj, removed: frozenset[str]):
    """Connected components of the graph minus `removed`, sorted."""
    left = sorted(set(vertices) - removed)
    seen: set[str] = set()
    comps = []
    for s in left:
        if s in seen:
            continue
        comp = set()
        stack = [s]
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(w for w in adj[v] if w not in removed and w not in comp)
        seen |= comp
        comps.append(frozenset(comp))
    return sorted(comps, key=min)


def _support_key(g: Graph):
    return (
        g.vertices,
        frozenset(frozenset((e.u, e.v)) for e in g.edges.values()),
    )


def _simple_adj(g: Graph) -> dict[str, set[str]]:
    return {v: set(g.neighbors(v)) for v in g.vertices}


def is_planar(g: Graph) -> bool:
    sg = nx.Graph()
    sg.add_nodes_from(sorted(g.vertices))
    sg.add_edges_from((e.u, e.v) for e in g.sorted_edges())
    return nx.check_planarity(sg)[0]


def classify(g: Graph, width: int) -> str | None:
    """p-type if planar, else c-type if treewidth fits, else None."""
    if is_planar(g):
        return KIND_P
    if g.num_vertices <= MAX_EXACT and treewidth_exact(g) <= width:
        return KIND_C
    return None


class _Search:
    """Memoized decomposability search over simple-support keys.

    `probe` answers whether a piece can be handled at all (leaf or split);
    `winner` finds the lexicographically smallest separating set all of
    whose sides pass `probe`, which drives the actual, maximal splitting.
    """

    def __init__(self, width: int):
        self.width = width
        self.kind_memo: dict[tuple, str | None] = {}
        self.winner_memo: dict[tuple, frozenset[str] | None] = {}

    def leaf_kind(self, g: Graph) -> str | None:
        key = _support_key(g)
        if key not in self.kind_memo:
            self.kind_memo[key] = classify(g, self.width)
        return self.kind_memo[key]

    def probe(self, g: Graph) -> bool:
        if self.leaf_kind(g) is not None:
            return True
        return self.winner(g) is not None

    def winner(self, g: Graph) -> frozenset[str] | None:
        key = _support_key(g)
        if key in self.winner_memo:
            return self.winner_memo[key]
        adj = _simple_adj(g)
        found: frozenset[str] | None = None
        for size in (2, 3):
            if found is not None:
                break
            for combo in itertools.combinations(sorted(g.vertices), size):
                sep = frozenset(combo)
                comps = _support_components(g.vertices, adj, sep)
                if len(comps) < 2:
                    continue
                if all(self.probe(_side_support(g, sep, comp)) for comp in comps):
                    found = sep
                    break
        self.winner_memo[key] = found
        return found


def _side_support(g: Graph, sep: frozenset[str], comp: frozenset[str]) -> Graph:
    """The support of one side of a split: component plus the set, with the
    set filled into a clique.  Used only for search keys."""
    keep = comp | sep
    edges = []
    used = set()
    for e in g.sorted_edges():
        pair = frozenset((e.u, e.v))
        if e.u in keep and e.v in keep and pair not in used:
            used.add(pair)
            edges.append(Edge(f"k{len(edges)}", e.u, e.v))
    for x, y in itertools.combinations(sorted(sep), 2):
        if frozenset((x, y)) not in used:
            edges.append(Edge(f"k{len(edges)}", x, y, VIRTUAL))
    return Graph(keep, edges)


class _Builder:
    def __init__(self, width: int, search: _Search):
        self.width = width
        self.search = search
        self.nodes: dict[int, ComponentNode] = {}
        self.edges: list[TreeEdge] = []
        self.vcount = 0

    def fresh_virtual(self, x: str, y: str) -> Edge:
        e = Edge(f"virt{self.vcount}", x, y, VIRTUAL)
        self.vcount += 1
        return e

    def build(self, sub: Graph) -> list[int]:
        sep = self.search.winner(sub)
        if sep is None:
            kind = self.search.leaf_kind(sub)
            if kind is None:
                raise StructuralError(
                    "graph cannot be decomposed into planar and "
                    f"width-{self.width} pieces",
                    witness=sorted(sub.vertices),
                )
            nid = len(self.nodes)
            width = None
            if kind == KIND_C:
                width = treewidth_exact(sub)
            self.nodes[nid] = ComponentNode(nid, kind, sub, [], width)
            return [nid]
        adj = _simple_adj(sub)
        comps = _support_components(sub.vertices, adj, sep)
        inside = [
            e
            for e in sub.sorted_edges()
            if e.u in sep and e.v in sep
        ]
        ports: list[int] = []
        all_ids: list[int] = []
        for i, comp in enumerate(comps):
            keep = comp | sep
            edges = [
                e
                for e in sub.sorted_edges()
                if e.u in keep and e.v in keep and not (e.u in sep and e.v in sep)
            ]
            if i == 0:
                edges.extend(inside)
            have_virtual = {
                frozenset((e.u, e.v)) for e in edges if e.tag == VIRTUAL
            }
            for x, y in itertools.combinations(sorted(sep), 2):
                if frozenset((x, y)) not in have_virtual:
                    edges.append(self.fresh_virtual(x, y))
            ids = self.build(Graph(keep, edges))
            all_ids.extend(ids)
            port = next(
                nid for nid in ids if sep <= self.nodes[nid].graph.vertices
            )
            ports.append(port)
            if sep not in self.nodes[port].separating_sets:
                self.nodes[port].separating_sets.append(sep)
        for other in ports[1:]:
            self.edges.append(TreeEdge(ports[0], other, sep))
        return all_ids


def decompose(g: Graph, width: int) -> ComponentTree:
    """Component tree of a biconnected graph; StructuralError when the
    graph is not assembled from planar and width-bounded pieces."""
    if not g.is_connected():
        raise StructuralError("decompose expects a connected graph")
    cut = articulation_points(g)
    if cut:
        raise StructuralError(
            "decompose expects a biconnected graph; split at articulation "
            "points first",
            witness=sorted(cut),
        )
    search = _Search(width)
    builder = _Builder(width, search)
    builder.build(g)
    return ComponentTree(builder.nodes, builder.edges, 0)


def block_edge_sets(g: Graph) -> list[frozenset[str]]:
    """Edge-id sets of the biconnected components (multigraph-aware)."""
    num: dict[str, int] = {}
    low: dict[str, int] = {}
    counter = [0]
    estack: list[str] = []
    blocks: list[frozenset[str]] = []

    for start in sorted(g.vertices):
        if start in num:
            continue
        # iterative DFS: (vertex, incoming edge id, iterator over stubs)
        num[start] = low[start] = counter[0]
        counter[0] += 1
        stack = [(start, None, iter(g.adjacency[start]))]
        while stack:
            v, in_eid, it = stack[-1]
            advanced = False
            for w, eid in it:
                if eid == in_eid:
                    continue
                if w not in num:
                    num[w] = low[w] = counter[0]
                    counter[0] += 1
                    estack.append(eid)
                    stack.append((w, eid, iter(g.adjacency[w])))
                    advanced = True
                    break
                if num[w] < num[v]:
                    estack.append(eid)
                    low[v] = min(low[v], num[w])
            if advanced:
                continue
            stack.pop()
            if stack:
                pv = stack[-1][0]
                low[pv] = min(low[pv], low[v])
                if low[v] >= num[pv]:
                    block = []
                    while estack:
                        top = estack.pop()
                        block.append(top)
                        if top == in_eid:
                            break
                    blocks.append(frozenset(block))
    return blocks


def articulation_points(g: Graph) -> set[str]:
    counts: dict[str, int] = {v: 0 for v in g.vertices}
    for block in block_edge_sets(g):
        touched = set()
        for eid in block:
            e = g.edges[eid]
            touched.add(e.u)
            touched.add(e.v)
        for v in touched:
            counts[v] += 1
    return {v for v, c in counts.items() if c > 1}


def split_biconnected(g: Graph) -> list[Graph]:
    """The biconnected components as standalone graphs, deterministic order.

    Isolated vertices produce single-vertex graphs.  Every simple cycle of
    the input lies inside exactly one returned component.
    """
    out = []
    claimed: set[str] = set()
    for block in block_edge_sets(g):
        edges = [g.edges[eid] for eid in sorted(block)]
        verts = {e.u for e in edges} | {e.v for e in edges}
        claimed |= verts
        out.append(Graph(verts, edges))
    for v in sorted(g.vertices - claimed):
        out.append(Graph({v}, []))
    return sorted(
        out, key=lambda sg: (min(sg.vertices), tuple(sorted(sg.vertices)))
    )


def decompose_full(g: Graph, width: int) -> ComponentTree:
    """Component tree of any connected graph: biconnected blocks are
    decomposed independently and stitched at articulation vertices with
    singleton separating sets."""
    if not g.is_connected():
        raise StructuralError("input graph must be connected")
    if g.num_vertices == 1:
        node = ComponentNode(0, KIND_P, g, [])
        return ComponentTree({0: node}, [], 0)
    pieces = split_biconnected(g)
    nodes: dict[int, ComponentNode] = {}
    edges: list[TreeEdge] = []
    piece_node_ids: list[list[int]] = []
    for piece in pieces:
        sub = decompose(piece, width)
        offset = len(nodes)
        remap = {nid: nid + offset for nid in sub.nodes}
        for nid in sorted(sub.nodes):
            n = sub.nodes[nid]
            n.id = remap[nid]
            nodes[n.id] = n
        for te in sub.edges:
            edges.append(TreeEdge(remap[te.a], remap[te.b], te.sep))
        piece_node_ids.append([remap[nid] for nid in sorted(sub.nodes)])
    if len(pieces) > 1:
        cut_vertices = articulation_points(g)
        for v in sorted(cut_vertices):
            hubs = []
            for ids in piece_node_ids:
                holders = [
                    nid for nid in ids if v in nodes[nid].graph.vertices
                ]
                if holders:
                    hubs.append(min(holders))
            sep = frozenset({v})
            for other in hubs[1:]:
                edges.append(TreeEdge(hubs[0], other, sep))
                for nid in (hubs[0], other):
                    if sep not in nodes[nid].separating_sets:
                        nodes[nid].separating_sets.append(sep)
    return ComponentTree(nodes, edges, 0)


def merge_ctype_neighbors(t: ComponentTree) -> ComponentTree:
    """Collapse tree edges joining two small-width nodes, recording a
    conservative width bound for the union."""
    nodes = {nid: n for nid, n in t.nodes.items()}
    edges = list(t.edges)
    root = t.root
    while True:
        target = None
        for te in sorted(edges, key=lambda te: (min(te.a, te.b), max(te.a, te.b))):
            if nodes[te.a].kind == KIND_C and nodes[te.b].kind == KIND_C:
                target = te
                break
        if target is None:
            break
        keep, drop = min(target.a, target.b), max(target.a, target.b)
        nk, nd = nodes[keep], nodes[drop]
        pairs_virtual = {
            frozenset((e.u, e.v)) for e in nk.graph.edges.values() if e.tag == VIRTUAL
        }
        extra = []
        for e in nd.graph.sorted_edges():
            if e.tag == VIRTUAL:
                pair = frozenset((e.u, e.v))
                if pair in pairs_virtual:
                    continue
                pairs_virtual.add(pair)
            extra.append(e)
        merged_graph = Graph(
            nk.graph.vertices | nd.graph.vertices,
            list(nk.graph.sorted_edges()) + extra,
        )
        new_edges = []
        for te in edges:
            if te is target:
                continue
            a = keep if te.a == drop else te.a
            b = keep if te.b == drop else te.b
            new_edges.append(TreeEdge(a, b, te.sep))
        seps: list[frozenset[str]] = []
        for s in nk.separating_sets + nd.separating_sets:
            if s in seps:
                continue
            if any(te.sep == s and keep in (te.a, te.b) for te in new_edges):
                seps.append(s)
        wk = nk.width if nk.width is not None else 0
        wd = nd.width if nd.width is not None else 0
        nodes[keep] = ComponentNode(
            keep, KIND_C, merged_graph, seps, wk + wd + len(target.sep)
        )
        del nodes[drop]
        edges = new_edges
        if root == drop:
            root = keep
    return ComponentTree(nodes, edges, root)


def validate_component_tree(t: ComponentTree, reference: Graph | None = None) -> None:
    """Structural sanity of a component tree; raises StructuralError."""
    if t.root not in t.nodes:
        raise StructuralError("root is not a node")
    if len(t.edges) != len(t.nodes) - 1:
        raise StructuralError("edge count does not match a tree")
    seen = {t.root}
    queue = [t.root]
    while queue:
        cur = queue.pop()
        for other, _ in t.neighbors(cur):
            if other not in seen:
                seen.add(other)
                queue.append(other)
    if seen != set(t.nodes):
        raise StructuralError("component adjacency is not connected")
    for te in t.edges:
        if not 1 <= len(te.sep) <= 3:
            raise StructuralError(f"separating set size {len(te.sep)} out of range")
        for nid in (te.a, te.b):
            node = t.nodes[nid]
            if not te.sep <= node.graph.vertices:
                raise StructuralError(
                    f"node {nid} lacks vertices of its separating set"
                )
            if te.sep not in node.separating_sets:
                raise StructuralError(
                    f"node {nid} does not register separating set {sorted(te.sep)}"
                )
    for nid in sorted(t.nodes):
        node = t.nodes[nid]
        virtual_pairs = {
            frozenset((e.u, e.v))
            for e in node.graph.edges.values()
            if e.tag == VIRTUAL
        }
        for s in node.separating_sets:
            if len(s) < 2:
                continue
            for x, y in itertools.combinations(sorted(s), 2):
                if frozenset((x, y)) not in virtual_pairs:
                    raise StructuralError(
                        f"set {sorted(s)} in node {nid} is not a virtual clique"
                    )
        if node.kind == KIND_P and not is_planar(node.graph):
            raise StructuralError(f"planar node {nid} is not planar")
        if node.kind not in (KIND_P, KIND_C):
            raise StructuralError(f"unknown node kind {node.kind!r}")
    glued = t.glued_graph()
    if reference is not None:
        if glued.vertices != reference.vertices:
            raise StructuralError("reassembly changes the vertex set")
        ref_edges = {
            eid: (frozenset((e.u, e.v)), e.tag) for eid, e in reference.edges.items()
        }
        got_edges = {
            eid: (frozenset((e.u, e.v)), e.tag) for eid, e in glued.edges.items()
        }
        if ref_edges != got_edges:
            raise StructuralError("reassembly changes the edge set")
    # each labeled tree edge must be a genuine separator of the glued graph
    adj = _simple_adj(glued)
    for te in t.edges:
        tree_adj: dict[int, set[int]] = {nid: set() for nid in t.nodes}
        for other_te in t.edges:
            if other_te is te:
                continue
            tree_adj[other_te.a].add(other_te.b)
            tree_adj[other_te.b].add(other_te.a)
        side_b: set[int] = set()
        stack = [te.b]
        while stack:
            cur = stack.pop()
            if cur in side_b:
                continue
            side_b.add(cur)
            stack.extend(tree_adj[cur] - side_b)
        verts_b = set()
        for nid in side_b:
            verts_b |= t.nodes[nid].graph.vertices
        verts_b -= te.sep
        verts_a = glued.vertices - verts_b - te.sep
        if not verts_a or not verts_b:
            continue
        reach = set()
        stack = sorted(verts_b)
        while stack:
            v = stack.pop()
            if v in reach:
                continue
            reach.add(v)
            stack.extend(w for w in adj[v] if w not in te.sep and w not in reach)
        if reach & verts_a:
            raise StructuralError(
                f"set {sorted(te.sep)} does not separate its tree sides"
            )
