"""Exact tree decompositions, and the hybrid decomposition built over a
component tree.

Treewidth is computed exactly by dynamic programming over vertex subsets
(min over elimination orders of the max reachability degree), so it is
capped at 16 vertices; the pieces this package decomposes stay well under
that.  Star-shaped nodes produced by the sharing-split gadget carry a
closed-form decomposition instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import InputError, StructuralError
from .graph import Graph

MAX_EXACT = 16


def _adjacency_masks(g: Graph) -> tuple[list[str], list[int]]:
    verts = sorted(g.vertices)
    ix = {v: i for i, v in enumerate(verts)}
    adj = [0] * len(verts)
    for e in g.edges.values():
        adj[ix[e.u]] |= 1 << ix[e.v]
        adj[ix[e.v]] |= 1 << ix[e.u]
    return verts, adj


def _reach_degree(adj: list[int], through: int, v: int) -> int:
    # vertices outside `through` seen from v via paths inside `through`
    seen = 1 << v
    stack = [v]
    out = 0
    while stack:
        u = stack.pop()
        rest = adj[u] & ~seen
        while rest:
            low = rest & -rest
            rest ^= low
            w = low.bit_length() - 1
            seen |= low
            if through >> w & 1:
                stack.append(w)
            else:
                out += 1
    return out


def treewidth_exact(g: Graph) -> int:
    """Exact treewidth via subset DP; raises InputError above 16 vertices."""
    n = g.num_vertices
    if n == 0:
        raise InputError("treewidth of the empty graph is undefined here")
    if n > MAX_EXACT:
        raise InputError(f"exact treewidth capped at {MAX_EXACT} vertices, got {n}")
    if n == 1:
        return 0
    verts, adj = _adjacency_masks(g)
    full = (1 << n) - 1
    tw = [0] * (full + 1)
    for mask in range(1, full + 1):
        best = None
        m = mask
        while m:
            low = m & -m
            m ^= low
            v = low.bit_length() - 1
            prev = mask ^ low
            cand = max(tw[prev], _reach_degree(adj, prev, v))
            if best is None or cand < best:
                best = cand
        tw[mask] = best
    return tw[full]


def elimination_order(g: Graph) -> list[str]:
    """An optimal elimination order (ties broken by vertex name)."""
    n = g.num_vertices
    if n > MAX_EXACT:
        raise InputError(f"exact treewidth capped at {MAX_EXACT} vertices, got {n}")
    verts, adj = _adjacency_masks(g)
    full = (1 << n) - 1
    tw = [0] * (full + 1)
    for mask in range(1, full + 1):
        best = None
        m = mask
        while m:
            low = m & -m
            m ^= low
            v = low.bit_length() - 1
            prev = mask ^ low
            cand = max(tw[prev], _reach_degree(adj, prev, v))
            if best is None or cand < best:
                best = cand
        tw[mask] = best
    order: list[str] = []
    mask = full
    while mask:
        pick = None
        m = mask
        while m:
            low = m & -m
            m ^= low
            v = low.bit_length() - 1
            prev = mask ^ low
            cand = max(tw[prev], _reach_degree(adj, prev, v))
            if cand == tw[mask] and (pick is None or verts[v] < verts[pick]):
                pick = v
        order.append(verts[pick])
        mask ^= 1 << pick
    # the walk picks the vertex eliminated last at each step
    return order[::-1]


@dataclass(frozen=True)
class LocalDecomp:
    """A rooted tree decomposition over anonymous integer bag indices."""

    bags: tuple[frozenset[str], ...]
    edges: tuple[tuple[int, int], ...]
    root: int

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1


def tree_decompose(g: Graph, width: int | None = None) -> LocalDecomp:
    """Optimal-width rooted decomposition from an elimination order.

    Bags subsumed by a neighbor are pruned.  If ``width`` is given and
    the optimum exceeds it, StructuralError is raised.
    """
    if g.num_vertices == 0:
        raise InputError("cannot decompose the empty graph")
    if g.num_vertices == 1:
        return LocalDecomp((frozenset(g.vertices),), (), 0)
    order = elimination_order(g)
    pos = {v: i for i, v in enumerate(order)}
    nbrs: dict[str, set[str]] = {v: set(g.neighbors(v)) for v in g.vertices}
    bags: list[frozenset[str]] = []
    parent: dict[int, int] = {}
    for i, v in enumerate(order):
        later = {u for u in nbrs[v] if pos[u] > i}
        bags.append(frozenset({v} | later))
        for a in later:  # fill in: later neighbors become a clique
            for b in later:
                if a != b:
                    nbrs[a].add(b)
            nbrs[a].discard(v)
    nbr_bags: dict[int, set[int]] = {i: set() for i in range(len(bags))}
    for i, v in enumerate(order):
        later = sorted(bags[i] - {v}, key=lambda u: pos[u])
        p = pos[later[0]] if later else (i + 1 if i + 1 < len(order) else None)
        if p is not None:
            nbr_bags[i].add(p)
            nbr_bags[p].add(i)
    # prune bags contained in an adjacent bag
    merged_into: dict[int, int] = {}
    changed = True
    while changed:
        changed = False
        for i in sorted(nbr_bags):
            host = next(
                (j for j in sorted(nbr_bags[i]) if bags[i] <= bags[j]), None
            )
            if host is None:
                continue
            for j in nbr_bags.pop(i):
                nbr_bags[j].discard(i)
                if j != host:
                    nbr_bags[j].add(host)
                    nbr_bags[host].add(j)
            merged_into[i] = host
            changed = True
            break
    live = sorted(nbr_bags)
    remap = {old: new for new, old in enumerate(live)}
    out_edges = sorted(
        (min(remap[a], remap[b]), max(remap[a], remap[b]))
        for a in live
        for b in nbr_bags[a]
        if a < b
    )
    root_old = pos[order[-1]]
    while root_old in merged_into:
        root_old = merged_into[root_old]
    dec = LocalDecomp(
        tuple(bags[i] for i in live), tuple(out_edges), remap[root_old]
    )
    if width is not None and dec.width > width:
        raise StructuralError(
            f"treewidth {dec.width} exceeds the bound {width}", witness=sorted(g.vertices)
        )
    return dec


def beta_decomposition(
    centers: Sequence[str], leaf_groups: Sequence[Sequence[str]]
) -> LocalDecomp:
    """Closed-form decomposition for a sharing-split node: a center bag of
    the hub vertices with one bag per attached component."""
    hub = frozenset(centers)
    bags = [hub] + [hub | frozenset(grp) for grp in leaf_groups]
    edges = tuple((0, j + 1) for j in range(len(leaf_groups)))
    return LocalDecomp(tuple(bags), edges, 0)


@dataclass(frozen=True)
class Bag:
    id: str
    vertices: frozenset[str]
    # ("p", node_id) for a full planar-node bag,
    # ("c", node_id, local_index) for a bag of a small-width node
    origin: tuple


class TreeDecomp:
    """Rooted tree decomposition of a glued graph, bags drawn per component.

    Edges that join bags of two different component nodes carry the
    separating set they were glued along; edges inside one component's
    local decomposition carry None.
    """

    def __init__(
        self,
        bags: Iterable[Bag],
        parent: Mapping[str, str | None],
        sep_to_parent: Mapping[str, frozenset[str] | None],
        root: str,
    ) -> None:
        self.bags: dict[str, Bag] = {b.id: b for b in bags}
        self.parent = dict(parent)
        self.sep_to_parent = dict(sep_to_parent)
        self.root = root
        if self.parent.get(root, None) is not None:
            raise InputError("root bag must have no parent")
        self._children: dict[str, list[str]] = {b: [] for b in self.bags}
        for b, p in self.parent.items():
            if p is not None:
                self._children[p].append(b)
        for kids in self._children.values():
            kids.sort()
        self.depth: dict[str, int] = {root: 0}
        stack = [root]
        while stack:
            b = stack.pop()
            for c in self._children[b]:
                self.depth[c] = self.depth[b] + 1
                stack.append(c)
        if len(self.depth) != len(self.bags):
            raise StructuralError("bag tree is not connected")
        self._bags_with: dict[str, list[str]] = {}
        for bid in sorted(self.bags):
            for v in self.bags[bid].vertices:
                self._bags_with.setdefault(v, []).append(bid)

    def children(self, bag_id: str) -> list[str]:
        return self._children[bag_id]

    def bags_with(self, v: str) -> list[str]:
        return self._bags_with.get(v, [])

    def highest_bag_with(self, v: str) -> str:
        cands = self.bags_with(v)
        if not cands:
            raise InputError(f"vertex {v!r} is in no bag")
        return min(cands, key=lambda b: (self.depth[b], b))

    def highest_bag_with_pair(self, u: str, v: str) -> str:
        cands = [b for b in self.bags_with(u) if v in self.bags[b].vertices]
        if not cands:
            raise InputError(f"no bag contains both {u!r} and {v!r}")
        return min(cands, key=lambda b: (self.depth[b], b))

    def shared_with_parent(self, bag_id: str) -> frozenset[str]:
        p = self.parent[bag_id]
        if p is None:
            return frozenset()
        return self.bags[bag_id].vertices & self.bags[p].vertices

    def validate(self, graph: Graph) -> None:
        """Check the three tree-decomposition properties against a graph."""
        covered = frozenset().union(*(b.vertices for b in self.bags.values()))
        if covered != graph.vertices:
            raise StructuralError(
                "bags do not cover the vertex set exactly",
                witness=sorted(covered ^ graph.vertices),
            )
        for e in graph.sorted_edges():
            if not any(
                e.u in self.bags[b].vertices and e.v in self.bags[b].vertices
                for b in self.bags
            ):
                raise StructuralError(
                    f"edge {e.id!r} has no host bag", witness=(e.u, e.v)
                )
        for v in sorted(graph.vertices):
            bset = set(self.bags_with(v))
            top = self.highest_bag_with(v)
            for b in bset:
                # every bag with v must reach the highest one inside bset
                cur = b
                while cur != top:
                    nxt = self.parent[cur]
                    if nxt is None or cur not in bset:
                        raise StructuralError(
                            f"bags containing {v!r} are not connected",
                            witness=sorted(bset),
                        )
                    cur = nxt
                if top not in bset:
                    raise StructuralError(
                        f"bags containing {v!r} are not connected",
                        witness=sorted(bset),
                    )
        return None

    def to_obj(self) -> dict:
        out = []
        for bid in sorted(self.bags, key=lambda b: (self.depth[b], b)):
            bag = self.bags[bid]
            sep = self.sep_to_parent.get(bid)
            out.append(
                {
                    "id": bid,
                    "vertices": sorted(bag.vertices),
                    "origin": list(bag.origin),
                    "parent": self.parent[bid],
                    "sep": sorted(sep) if sep is not None else None,
                }
            )
        return {"bags": out, "root": self.root}


def _junction(node, local: LocalDecomp, sep: frozenset[str]) -> int:
    """Local index of the bag holding `sep`, nearest to the local root."""
    holders = [i for i, b in enumerate(local.bags) if sep <= b]
    if not holders:
        raise StructuralError(
            f"no bag of node {node.id} holds separating set {sorted(sep)}"
        )
    adj: dict[int, list[int]] = {i: [] for i in range(len(local.bags))}
    for a, b in local.edges:
        adj[a].append(b)
        adj[b].append(a)
    dist = {local.root: 0}
    queue = [local.root]
    qi = 0
    while qi < len(queue):
        cur = queue[qi]
        qi += 1
        for nxt in sorted(adj[cur]):
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return min(holders, key=lambda i: (dist[i], i))


def build_hybrid(tree) -> TreeDecomp:
    """Assemble the glued graph's tree decomposition from a component tree.

    Planar nodes contribute one bag holding their whole vertex set; the
    others contribute their optimal (or closed-form) local decomposition.
    Component-tree edges become bag-tree edges between the two nodes'
    junction bags and are labeled with the separating set.
    """
    locals_: dict[int, LocalDecomp] = {}
    for nid in sorted(tree.nodes):
        node = tree.nodes[nid]
        if node.kind == "p-type":
            locals_[nid] = LocalDecomp((frozenset(node.graph.vertices),), (), 0)
        elif node.beta is not None:
            locals_[nid] = beta_decomposition(*node.beta)
        else:
            locals_[nid] = tree_decompose(node.graph)

    bag_id: dict[tuple[int, int], str] = {}
    bags: list[Bag] = []
    for nid in sorted(tree.nodes):
        node = tree.nodes[nid]
        for i, verts in enumerate(locals_[nid].bags):
            bid = f"b{len(bags)}"
            bag_id[(nid, i)] = bid
            origin = ("p", nid) if node.kind == "p-type" else ("c", nid, i)
            bags.append(Bag(bid, verts, origin))

    adj: dict[str, list[tuple[str, frozenset[str] | None]]] = {
        b.id: [] for b in bags
    }
    for nid in sorted(tree.nodes):
        for a, b in locals_[nid].edges:
            x, y = bag_id[(nid, a)], bag_id[(nid, b)]
            adj[x].append((y, None))
            adj[y].append((x, None))
    for te in tree.edges:
        ja = _junction(tree.nodes[te.a], locals_[te.a], te.sep)
        jb = _junction(tree.nodes[te.b], locals_[te.b], te.sep)
        x, y = bag_id[(te.a, ja)], bag_id[(te.b, jb)]
        adj[x].append((y, te.sep))
        adj[y].append((x, te.sep))

    root = bag_id[(tree.root, locals_[tree.root].root)]
    parent: dict[str, str | None] = {root: None}
    sep_to_parent: dict[str, frozenset[str] | None] = {root: None}
    queue = [root]
    qi = 0
    while qi < len(queue):
        cur = queue[qi]
        qi += 1
        for nxt, sep in sorted(adj[cur], key=lambda t: t[0]):
            if nxt in parent:
                continue
            parent[nxt] = cur
            sep_to_parent[nxt] = sep
            queue.append(nxt)
    if len(parent) != len(bags):
        raise StructuralError("component tree does not assemble into a tree of bags")
    return TreeDecomp(bags, parent, sep_to_parent, root)
