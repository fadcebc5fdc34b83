"""Centroid recursion over the bag tree.

Removing the centroid bag splits the bag tree into pieces of at most half
the size; recursing gives a logarithmic-depth auxiliary tree.  Each bag's
height (leaves have height 1) and its subtree's leaf count drive the
magnitudes the weight engine assigns, and each bag records its
attachments: the pieces hanging off it during its own recursion step,
labeled with the separating set of the bag-tree edge leading in.
"""

from __future__ import annotations

from dataclasses import dataclass

from .treedec import TreeDecomp


@dataclass(frozen=True)
class Attachment:
    sep: frozenset | None   # label of the bag-tree edge into the piece
    neighbor: str           # the piece's bag adjacent to the owner
    root: str               # centroid of the piece
    height: int
    leaves: int


@dataclass
class AuxNode:
    bag: str
    parent: str | None
    children: tuple[str, ...]
    height: int
    leaves: int
    attachments: tuple[Attachment, ...]


class AuxTree:
    def __init__(self, nodes: dict[str, AuxNode], root: str):
        self.nodes = nodes
        self.root = root
        self._subtree: dict[str, frozenset[str]] = {}

        def collect(b: str) -> frozenset[str]:
            got = frozenset({b}).union(
                *(collect(c) for c in self.nodes[b].children)
            )
            self._subtree[b] = got
            return got

        collect(root)

    def subtree_bags(self, bag: str) -> frozenset[str]:
        return self._subtree[bag]

    def height(self, bag: str) -> int:
        return self.nodes[bag].height

    def leaves(self, bag: str) -> int:
        return self.nodes[bag].leaves

    def to_obj(self) -> dict:
        out = []
        for bid in sorted(self.nodes):
            n = self.nodes[bid]
            out.append(
                {
                    "bag": bid,
                    "parent": n.parent,
                    "height": n.height,
                    "leaves": n.leaves,
                    "attachments": [
                        {
                            "sep": sorted(a.sep) if a.sep is not None else None,
                            "root": a.root,
                            "height": a.height,
                            "leaves": a.leaves,
                        }
                        for a in n.attachments
                    ],
                }
            )
        return {"nodes": out, "root": self.root}


def _components(piece: frozenset[str], removed: str, adj) -> list[frozenset[str]]:
    comps = []
    seen = {removed}
    for start in sorted(piece):
        if start in seen:
            continue
        comp = set()
        stack = [start]
        while stack:
            cur = stack.pop()
            if cur in comp:
                continue
            comp.add(cur)
            stack.extend(
                n for n, _ in adj[cur] if n in piece and n != removed and n not in comp
            )
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def _centroid(piece: frozenset[str], adj) -> str:
    best = None
    for b in sorted(piece):
        worst = max(
            (len(c) for c in _components(piece, b, adj)), default=0
        )
        if best is None or worst < best[0]:
            best = (worst, b)
    return best[1]


def build_aux(dec: TreeDecomp) -> AuxTree:
    adj: dict[str, list[tuple[str, frozenset | None]]] = {
        b: [] for b in dec.bags
    }
    for child in sorted(dec.bags):
        p = dec.parent[child]
        if p is None:
            continue
        sep = dec.sep_to_parent[child]
        adj[child].append((p, sep))
        adj[p].append((child, sep))

    nodes: dict[str, AuxNode] = {}

    def build(piece: frozenset[str], a_parent: str | None) -> str:
        c = _centroid(piece, adj)
        children = []
        attachments = []
        for comp in sorted(_components(piece, c, adj), key=min):
            sub_root = build(comp, c)
            neighbor, sep = next(
                (n, s) for n, s in sorted(adj[c]) if n in comp
            )
            children.append(sub_root)
            attachments.append(
                Attachment(
                    sep,
                    neighbor,
                    sub_root,
                    nodes[sub_root].height,
                    nodes[sub_root].leaves,
                )
            )
        if children:
            height = 1 + max(nodes[ch].height for ch in children)
            leaves = sum(nodes[ch].leaves for ch in children)
        else:
            height, leaves = 1, 1
        nodes[c] = AuxNode(
            c, a_parent, tuple(children), height, leaves, tuple(attachments)
        )
        return c

    root = build(frozenset(dec.bags), None)
    return AuxTree(nodes, root)
