"""Random clique-sum instances for testing.

Assembles a graph by repeatedly gluing small pieces (planar shapes, plus a
few nonplanar small-treewidth ones) onto the graph built so far, sharing a
vertex set of size 1, 2 or 3.  Alongside the graph it maintains the
ground-truth component tree, with shared sets recorded on both endpoints
and spanned by virtual cliques.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .decompose import (
    KIND_C,
    KIND_P,
    ComponentNode,
    ComponentTree,
    TreeEdge,
    is_planar,
)
from .errors import InputError
from .graph import Edge, Graph, REAL, VIRTUAL
from .treedec import treewidth_exact


@dataclass(frozen=True)
class GenParams:
    num_pieces: int = 3
    width: int = 4
    bipartite: bool = False
    max_vertices: int = 28
    sep_sizes: tuple[int, ...] = (1, 2, 3)
    p_reuse_set: float = 0.15
    p_keep_clique_edge: float = 0.7
    p_parallel: float = 0.1
    # keep small-width locals small enough for exact width checks later
    max_sets_per_c_node: int = 3


def _cycle(n):
    pairs = [(i, (i + 1) % n) for i in range(n)]
    colors = {i: i % 2 for i in range(n)} if n % 2 == 0 else None
    return n, pairs, colors, KIND_P, None


def _wheel(rim):
    pairs = [(i, (i + 1) % rim) for i in range(rim)]
    pairs += [(rim, i) for i in range(rim)]
    return rim + 1, pairs, None, KIND_P, None


def _grid2(k):
    # vertices i (top row) and k + i (bottom row)
    pairs = []
    for i in range(k):
        pairs.append((i, k + i))
        if i + 1 < k:
            pairs.append((i, i + 1))
            pairs.append((k + i, k + i + 1))
    colors = {}
    for i in range(k):
        colors[i] = i % 2
        colors[k + i] = (i + 1) % 2
    return 2 * k, pairs, colors, KIND_P, None


def _theta():
    # two hubs joined by three length-two paths
    pairs = [(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1)]
    colors = {0: 0, 1: 0, 2: 1, 3: 1, 4: 1}
    return 5, pairs, colors, KIND_P, None


def _k4():
    pairs = list(itertools.combinations(range(4), 2))
    return 4, pairs, None, KIND_P, None


def _apollonian():
    pairs = list(itertools.combinations(range(4), 2))
    pairs += [(4, 0), (4, 1), (4, 2)]
    return 5, pairs, None, KIND_P, None


def _k2m(m):
    pairs = [(h, 2 + i) for h in range(2) for i in range(m)]
    colors = {0: 0, 1: 0}
    colors.update({2 + i: 1 for i in range(m)})
    return 2 + m, pairs, colors, KIND_P, None


def _k33():
    pairs = [(i, 3 + j) for i in range(3) for j in range(3)]
    colors = {i: 0 for i in range(3)}
    colors.update({3 + j: 1 for j in range(3)})
    return 6, pairs, colors, KIND_C, 3


def _k5():
    pairs = list(itertools.combinations(range(5), 2))
    return 5, pairs, None, KIND_C, 4


def _piece_menu(params: GenParams):
    if params.bipartite:
        menu = [
            lambda: _cycle(4),
            lambda: _cycle(6),
            lambda: _cycle(8),
            lambda: _grid2(2),
            lambda: _grid2(3),
            lambda: _k2m(2),
            lambda: _k2m(3),
        ]
        if params.width >= 3:
            menu.append(_k33)
        return menu
    menu = [
        lambda: _cycle(3),
        lambda: _cycle(5),
        lambda: _cycle(6),
        lambda: _wheel(3),
        lambda: _wheel(4),
        lambda: _wheel(5),
        lambda: _grid2(3),
        lambda: _grid2(4),
        _theta,
        _k4,
        _apollonian,
    ]
    if params.width >= 3:
        menu.append(_k33)
    if params.width >= 4:
        menu.append(_k5)
    return menu


class _Assembly:
    def __init__(self, params: GenParams, rng: random.Random):
        self.params = params
        self.rng = rng
        self.vertices: list[str] = []
        self.colors: dict[str, int] = {}
        self.real_edges: list[Edge] = []
        self.real_pairs: dict[frozenset, list[str]] = {}
        self.nodes: dict[int, ComponentNode] = {}
        self.tree_edges: list[TreeEdge] = []
        self.vcount = 0
        self.ecount = 0
        self.virtcount = 0

    def fresh_vertex(self) -> str:
        v = f"v{self.vcount:02d}"
        self.vcount += 1
        self.vertices.append(v)
        return v

    def fresh_edge(self, u: str, v: str) -> Edge:
        e = Edge(f"e{self.ecount}", u, v)
        self.ecount += 1
        return e

    def fresh_virtual(self, u: str, v: str) -> Edge:
        e = Edge(f"virt{self.virtcount}", u, v, VIRTUAL)
        self.virtcount += 1
        return e

    def add_real(self, e: Edge) -> None:
        self.real_edges.append(e)
        self.real_pairs.setdefault(frozenset((e.u, e.v)), []).append(e.id)

    def node_stays_valid(self, node: ComponentNode, extra: list[Edge]) -> bool:
        if not extra:
            return True
        cand = node.graph.with_extra_edges(extra)
        if node.kind == KIND_P:
            return is_planar(cand)
        return treewidth_exact(cand) <= self.params.width

    def missing_clique(self, node: ComponentNode, sep: tuple[str, ...]) -> list[Edge]:
        have = {
            frozenset((e.u, e.v))
            for e in node.graph.edges.values()
            if e.tag == VIRTUAL
        }
        out = []
        for x, y in itertools.combinations(sorted(sep), 2):
            if frozenset((x, y)) not in have:
                out.append(self.fresh_virtual(x, y))
        return out

    def place_first(self) -> None:
        count, pairs, colors, kind, width = self.rng.choice(
            _piece_menu(self.params)
        )()
        names = [self.fresh_vertex() for _ in range(count)]
        edges = []
        for a, b in pairs:
            e = self.fresh_edge(names[a], names[b])
            self.add_real(e)
            edges.append(e)
        if self.params.bipartite:
            for i, name in enumerate(names):
                self.colors[name] = colors[i]
        self.nodes[0] = ComponentNode(0, kind, Graph(names, edges), [], width)

    def registered_sets(self) -> list[tuple[int, frozenset]]:
        seen: set[frozenset] = set()
        out = []
        for nid in sorted(self.nodes):
            for s in self.nodes[nid].separating_sets:
                if s not in seen:
                    seen.add(s)
                    out.append((nid, s))
        return out

    def pick_attachment(self, piece_colors, attach_count):
        """Host node, separating-set tuple, and fresh-virtual list; either a
        reused registered set or a new one carved out of a host node."""
        rng = self.rng
        params = self.params
        reuse_pool = [
            (nid, s)
            for nid, s in self.registered_sets()
            if len(s) == attach_count
        ]
        if reuse_pool and rng.random() < params.p_reuse_set:
            nid, s = rng.choice(reuse_pool)
            return nid, tuple(sorted(s)), []
        for _ in range(40):
            nid = rng.choice(sorted(self.nodes))
            node = self.nodes[nid]
            if (
                node.kind == KIND_C
                and len(node.separating_sets) >= params.max_sets_per_c_node
            ):
                continue
            pool = sorted(node.graph.vertices)
            if len(pool) < attach_count:
                continue
            sep = tuple(sorted(rng.sample(pool, attach_count)))
            extra = self.missing_clique(node, sep) if attach_count >= 2 else []
            if not self.node_stays_valid(node, extra):
                continue
            return nid, sep, extra
        # a single shared vertex never changes the host graph
        nid = rng.choice(sorted(self.nodes))
        v = rng.choice(sorted(self.nodes[nid].graph.vertices))
        return nid, (v,), []

    def arrange_attach(self, piece_colors, count, sep):
        """Pick which piece vertices map onto the shared set, returning the
        local indices in sep order, or None when colors cannot match."""
        rng = self.rng
        if not self.params.bipartite:
            k = len(sep)
            pool = list(range(count))
            return tuple(rng.sample(pool, k))
        host_pattern = tuple(self.colors[v] for v in sep)
        flipped = tuple(1 - c for c in host_pattern)
        options = []
        for perm in itertools.permutations(range(count), len(sep)):
            pat = tuple(piece_colors[i] for i in perm)
            if pat == host_pattern:
                options.append((perm, False))
            elif pat == flipped:
                options.append((perm, True))
        if not options:
            return None
        return rng.choice(sorted(options, key=lambda o: o[0]))

    def glue_piece(self) -> None:
        rng = self.rng
        params = self.params
        count, pairs, piece_colors, kind, width = rng.choice(
            _piece_menu(params)
        )()
        sizes = [
            s
            for s in params.sep_sizes
            if s <= count and (not params.bipartite or s <= 2)
        ]
        attach_count = rng.choice(sizes)
        host_id, sep, host_extra = self.pick_attachment(
            piece_colors, attach_count
        )
        if len(sep) != attach_count:
            attach_count = len(sep)
        arranged = self.arrange_attach(piece_colors, count, sep)
        if arranged is None:
            # same-color host pair with an all-crossing piece; fall back to
            # a single shared vertex
            host_id, sep, host_extra = self.pick_attachment(piece_colors, 1)
            arranged = self.arrange_attach(piece_colors, count, sep)
        if params.bipartite:
            perm, flip = arranged
        else:
            perm, flip = arranged, False

        names: dict[int, str] = {}
        for k_, local in enumerate(perm):
            names[local] = sep[k_]
        for local in range(count):
            if local not in names:
                names[local] = self.fresh_vertex()
        if params.bipartite:
            for local in range(count):
                v = names[local]
                if v not in self.colors:
                    c = piece_colors[local]
                    self.colors[v] = 1 - c if flip else c

        sep_set = frozenset(sep)
        node_edges: list[Edge] = []
        for a, b in pairs:
            u, v = names[a], names[b]
            pair = frozenset((u, v))
            if pair <= sep_set:
                if pair in self.real_pairs:
                    if rng.random() < params.p_parallel:
                        e = self.fresh_edge(u, v)
                        self.add_real(e)
                        node_edges.append(e)
                    continue
                if rng.random() >= params.p_keep_clique_edge:
                    continue
            e = self.fresh_edge(u, v)
            self.add_real(e)
            node_edges.append(e)

        nid = len(self.nodes)
        piece_virtuals = []
        for x, y in itertools.combinations(sorted(sep), 2):
            piece_virtuals.append(self.fresh_virtual(x, y))
        node_graph = Graph(
            set(names.values()), node_edges + piece_virtuals
        )
        self.nodes[nid] = ComponentNode(nid, kind, node_graph, [], width)

        host = self.nodes[host_id]
        if host_extra:
            self.nodes[host_id] = ComponentNode(
                host.id,
                host.kind,
                host.graph.with_extra_edges(host_extra),
                host.separating_sets,
                host.width,
                host.beta,
            )
            host = self.nodes[host_id]
        for side in (host, self.nodes[nid]):
            if sep_set not in side.separating_sets:
                side.separating_sets.append(sep_set)
        self.tree_edges.append(TreeEdge(host_id, nid, sep_set))


def generate_instance(seed: int, params: GenParams) -> tuple[Graph, ComponentTree]:
    """Deterministic random clique-sum assembly plus its ground-truth tree."""
    if params.num_pieces < 1:
        raise InputError("need at least one piece")
    if params.bipartite and params.width < 2:
        raise InputError("bipartite instances need width at least 2")
    rng = random.Random(seed)
    asm = _Assembly(params, rng)
    asm.place_first()
    for _ in range(params.num_pieces - 1):
        if len(asm.vertices) >= params.max_vertices:
            break
        asm.glue_piece()
    bipartition = None
    if params.bipartite:
        left = sorted(v for v in asm.vertices if asm.colors[v] == 0)
        right = sorted(v for v in asm.vertices if asm.colors[v] == 1)
        bipartition = (left, right)
    graph = Graph(asm.vertices, asm.real_edges, bipartition)
    tree = ComponentTree(asm.nodes, asm.tree_edges, 0)
    return graph, tree
