"""Component-tree construction: splitting, classification, merging."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cliquecirc.decompose import (
    KIND_C,
    KIND_P,
    ComponentNode,
    ComponentTree,
    TreeEdge,
    articulation_points,
    classify,
    decompose,
    decompose_full,
    merge_ctype_neighbors,
    split_biconnected,
    validate_component_tree,
)
from cliquecirc.errors import StructuralError
from cliquecirc.graph import Edge, Graph, REAL, VIRTUAL
from cliquecirc.jsonio import dump_json


def graph_from_pairs(names, pairs):
    return Graph(
        sorted(names),
        [Edge(f"e{i}", u, v) for i, (u, v) in enumerate(pairs)],
    )


def complete_graph(names):
    names = list(names)
    edges = [
        (u, v) for u, v in itertools.combinations(names, 2)
    ]
    return graph_from_pairs(names, edges)


def virtual_pairs(node):
    return {
        frozenset((e.u, e.v))
        for e in node.graph.edges.values()
        if e.tag == VIRTUAL
    }


def real_pairs(node):
    return {
        frozenset((e.u, e.v))
        for e in node.graph.edges.values()
        if e.tag == REAL
    }


class TestClassify:
    def test_cycle_is_planar(self):
        g = graph_from_pairs("abcdef", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f"), ("f", "a")])
        assert classify(g, 4) == KIND_P

    def test_k5_is_small_width(self):
        assert classify(complete_graph("abcde"), 4) == KIND_C

    def test_k6_is_neither_at_width_four(self):
        assert classify(complete_graph("abcdef"), 4) is None

    def test_k6_fits_at_width_five(self):
        assert classify(complete_graph("abcdef"), 5) == KIND_C


class TestSplitBiconnected:
    def test_bowtie_splits_at_shared_vertex(self):
        g = graph_from_pairs(
            "abcde",
            [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d"), ("d", "e"), ("c", "e")],
        )
        parts = split_biconnected(g)
        assert len(parts) == 2
        assert {frozenset(p.vertices) for p in parts} == {
            frozenset("abc"),
            frozenset("cde"),
        }
        assert articulation_points(g) == {"c"}

    def test_path_splits_into_single_edges(self):
        g = graph_from_pairs("abcd", [("a", "b"), ("b", "c"), ("c", "d")])
        parts = split_biconnected(g)
        assert [sorted(p.vertices) for p in parts] == [
            ["a", "b"],
            ["b", "c"],
            ["c", "d"],
        ]

    def test_biconnected_graph_is_one_block(self):
        g = complete_graph("abcd")
        parts = split_biconnected(g)
        assert len(parts) == 1
        assert parts[0].vertices == g.vertices
        assert articulation_points(g) == set()

    def test_parallel_edges_stay_in_one_block(self):
        g = Graph(
            {"a", "b", "c"},
            [
                Edge("e0", "a", "b"),
                Edge("e1", "a", "b"),
                Edge("e2", "b", "c"),
            ],
        )
        parts = split_biconnected(g)
        assert len(parts) == 2
        twin = next(p for p in parts if "c" not in p.vertices)
        assert set(twin.edges) == {"e0", "e1"}

    def test_isolated_vertex_becomes_own_block(self):
        g = Graph({"a", "b", "z"}, [Edge("e0", "a", "b")])
        parts = split_biconnected(g)
        assert [sorted(p.vertices) for p in parts] == [["a", "b"], ["z"]]

    def test_every_cycle_lies_in_one_block(self):
        g = graph_from_pairs(
            "abcdefg",
            [
                ("a", "b"), ("b", "c"), ("a", "c"),
                ("c", "d"),
                ("d", "e"), ("e", "f"), ("f", "g"), ("d", "g"), ("e", "g"),
            ],
        )
        parts = split_biconnected(g)
        by_block = [set(p.edges) for p in parts]
        tri = {"e0", "e1", "e2"}
        assert any(tri <= b for b in by_block)
        quad = {"e4", "e5", "e6", "e7", "e8"}
        assert any(quad <= b for b in by_block)


class TestDecompose:
    def test_k4_single_planar_node(self):
        t = decompose(complete_graph("abcd"), 4)
        assert len(t.nodes) == 1 and not t.edges
        node = t.nodes[0]
        assert node.kind == KIND_P
        assert node.separating_sets == []
        assert virtual_pairs(node) == set()

    def test_two_k4_sharing_triangle(self):
        verts = "abcde"
        edges = [
            ("a", "b"), ("a", "c"), ("b", "c"),
            ("a", "d"), ("b", "d"), ("c", "d"),
            ("a", "e"), ("b", "e"), ("c", "e"),
        ]
        g = graph_from_pairs(verts, edges)
        t = decompose(g, 4)
        assert len(t.nodes) == 2
        assert [n.kind for n in t.nodes.values()] == [KIND_P, KIND_P]
        sep = frozenset("abc")
        assert [te.sep for te in t.edges] == [sep]
        tri = {frozenset(p) for p in [("a", "b"), ("a", "c"), ("b", "c")]}
        for node in t.nodes.values():
            assert virtual_pairs(node) == tri
        # the three real triangle edges live on exactly one side
        owners = [n for n in t.nodes.values() if tri <= real_pairs(n)]
        assert len(owners) == 1
        other = next(n for n in t.nodes.values() if n is not owners[0])
        assert not (tri & real_pairs(other))
        validate_component_tree(t, g)

    def test_k5_single_small_width_node(self):
        t = decompose(complete_graph("abcde"), 4)
        assert len(t.nodes) == 1
        assert t.nodes[0].kind == KIND_C
        assert t.nodes[0].width == 4

    def test_k6_rejected_with_witness(self):
        with pytest.raises(StructuralError) as exc:
            decompose(complete_graph("abcdef"), 4)
        assert exc.value.witness == list("abcdef")

    def test_four_cycle_splits_maximally(self):
        g = graph_from_pairs("abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
        t = decompose(g, 4)
        assert len(t.nodes) == 2
        assert [te.sep for te in t.edges] == [frozenset("ac")]
        validate_component_tree(t, g)

    def test_real_edge_inside_set_goes_to_first_side(self):
        # K5 with a pendant square attached across the edge {a, b}
        g = Graph(
            set("abcdex"),
            [Edge(f"e{i}", u, v) for i, (u, v) in enumerate(
                itertools.combinations("abcde", 2)
            )] + [Edge("e10", "a", "x"), Edge("e11", "b", "x")],
        )
        t = decompose(g, 4)
        assert len(t.nodes) == 2
        kinds = {n.id: n.kind for n in t.nodes.values()}
        assert sorted(kinds.values()) == [KIND_C, KIND_P]
        ab = frozenset(("a", "b"))
        holders = [n for n in t.nodes.values() if ab in real_pairs(n)]
        assert len(holders) == 1
        assert holders[0].kind == KIND_C
        for n in t.nodes.values():
            assert ab in virtual_pairs(n)
        validate_component_tree(t, g)

    def test_rejects_disconnected(self):
        g = Graph({"a", "b", "c", "d"}, [Edge("e0", "a", "b"), Edge("e1", "c", "d")])
        with pytest.raises(StructuralError):
            decompose(g, 4)

    def test_rejects_articulated(self):
        g = graph_from_pairs("abc", [("a", "b"), ("b", "c")])
        with pytest.raises(StructuralError):
            decompose(g, 4)

    def test_single_vertex(self):
        t = decompose(Graph({"v"}, []), 4)
        assert t.nodes[0].kind == KIND_P

    def test_chain_of_three_squares(self):
        g = graph_from_pairs(
            "abcdefgh",
            [
                ("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"),
                ("c", "e"), ("d", "f"), ("e", "f"),
                ("e", "g"), ("f", "h"), ("g", "h"),
            ],
        )
        t = decompose(g, 4)
        validate_component_tree(t, g)
        assert all(n.kind == KIND_P for n in t.nodes.values())
        # every separating set used is a real separator of size two
        assert all(len(te.sep) == 2 for te in t.edges)

    def test_glued_graph_restores_input(self):
        g = graph_from_pairs(
            "abcdef",
            [
                ("a", "b"), ("a", "c"), ("b", "c"),
                ("a", "d"), ("b", "d"), ("c", "d"),
                ("a", "e"), ("b", "e"), ("c", "e"),
                ("a", "f"), ("b", "f"),
            ],
        )
        t = decompose(g, 4)
        glued = t.glued_graph()
        assert glued.vertices == g.vertices
        assert {
            (eid, frozenset((e.u, e.v))) for eid, e in glued.edges.items()
        } == {
            (eid, frozenset((e.u, e.v))) for eid, e in g.edges.items()
        }

    def test_deterministic(self):
        g = graph_from_pairs(
            "abcdef",
            [
                ("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"),
                ("c", "e"), ("d", "e"),
                ("a", "f"), ("b", "f"),
            ],
        )
        one = dump_json(decompose(g, 4).to_obj())
        two = dump_json(decompose(g, 4).to_obj())
        assert one == two


class TestDecomposeFull:
    def test_bowtie(self):
        g = graph_from_pairs(
            "abcde",
            [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d"), ("d", "e"), ("c", "e")],
        )
        t = decompose_full(g, 4)
        assert len(t.nodes) == 2
        assert [te.sep for te in t.edges] == [frozenset("c")]
        validate_component_tree(t, g)

    def test_triangle_with_tail(self):
        g = graph_from_pairs(
            "abcd", [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")]
        )
        t = decompose_full(g, 4)
        validate_component_tree(t, g)
        assert len(t.nodes) == 2
        assert {te.sep for te in t.edges} == {frozenset("c")}

    def test_rejects_disconnected(self):
        g = Graph({"a", "b", "c", "d"}, [Edge("e0", "a", "b"), Edge("e1", "c", "d")])
        with pytest.raises(StructuralError):
            decompose_full(g, 4)

    def test_singleton_sets_span_no_virtual_edges(self):
        g = graph_from_pairs(
            "abcde",
            [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d"), ("d", "e"), ("c", "e")],
        )
        t = decompose_full(g, 4)
        for n in t.nodes.values():
            assert virtual_pairs(n) == set()

    def test_blocks_with_inner_splits(self):
        # two squares sharing an edge, then a bridge to a triangle
        g = graph_from_pairs(
            "abcdefgh",
            [
                ("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"),
                ("a", "e"), ("b", "e"),
                ("d", "f"),
                ("f", "g"), ("g", "h"), ("f", "h"),
            ],
        )
        t = decompose_full(g, 4)
        validate_component_tree(t, g)
        glued = t.glued_graph()
        assert glued.num_edges == g.num_edges


class TestMerge:
    def build_cc_tree(self):
        g = Graph(
            set("abcdefgh"),
            [Edge(f"e{i}", u, v) for i, (u, v) in enumerate(
                list(itertools.combinations("abcde", 2))
                + [p for p in itertools.combinations("abfgh", 2) if set(p) != {"a", "b"}]
            )],
        )
        return g, decompose(g, 4)

    def test_merges_adjacent_small_width_nodes(self):
        g, t = self.build_cc_tree()
        assert [n.kind for n in t.nodes.values()] == [KIND_C, KIND_C]
        m = merge_ctype_neighbors(t)
        assert len(m.nodes) == 1 and not m.edges
        node = m.nodes[min(m.nodes)]
        assert node.kind == KIND_C
        assert node.width == 4 + 4 + 2
        assert node.graph.vertices == g.vertices
        assert node.separating_sets == []
        merged_reals = {
            frozenset((e.u, e.v))
            for e in node.graph.edges.values()
            if e.tag == REAL
        }
        assert frozenset(("a", "b")) in merged_reals
        pair_counts = {}
        for e in node.graph.edges.values():
            if e.tag == VIRTUAL:
                pair = frozenset((e.u, e.v))
                pair_counts[pair] = pair_counts.get(pair, 0) + 1
        assert all(c == 1 for c in pair_counts.values())

    def test_leaves_planar_pairs_alone(self):
        g = graph_from_pairs(
            "abcde",
            [
                ("a", "b"), ("a", "c"), ("b", "c"),
                ("a", "d"), ("b", "d"), ("c", "d"),
                ("a", "e"), ("b", "e"), ("c", "e"),
            ],
        )
        t = decompose(g, 4)
        m = merge_ctype_neighbors(t)
        assert len(m.nodes) == len(t.nodes)
        assert dump_json(m.to_obj()) == dump_json(t.to_obj())

    def test_no_merge_across_planar_middle(self):
        k5_left = Graph(
            set("abcde"),
            [Edge(f"l{i}", u, v) for i, (u, v) in enumerate(itertools.combinations("abcde", 2))]
            + [Edge("virt0", "d", "e", VIRTUAL)],
        )
        square = Graph(
            set("defg"),
            [
                Edge("m0", "d", "f"), Edge("m1", "f", "g"), Edge("m2", "g", "e"),
                Edge("virt1", "d", "e", VIRTUAL),
                Edge("virt2", "f", "g", VIRTUAL),
            ],
        )
        k5_right = Graph(
            set("fghij"),
            [Edge(f"r{i}", u, v) for i, (u, v) in enumerate(itertools.combinations("fghij", 2)) if set((u, v)) != {"f", "g"}]
            + [Edge("virt3", "f", "g", VIRTUAL)],
        )
        ds = frozenset(("d", "e"))
        fg = frozenset(("f", "g"))
        t = ComponentTree(
            {
                0: ComponentNode(0, KIND_C, k5_left, [ds], 4),
                1: ComponentNode(1, KIND_P, square, [ds, fg]),
                2: ComponentNode(2, KIND_C, k5_right, [fg], 4),
            },
            [TreeEdge(0, 1, ds), TreeEdge(1, 2, fg)],
            0,
        )
        m = merge_ctype_neighbors(t)
        assert sorted(m.nodes) == [0, 1, 2]
        assert len(m.edges) == 2


class TestSerialization:
    def test_round_trip(self):
        g = graph_from_pairs(
            "abcde",
            [
                ("a", "b"), ("a", "c"), ("b", "c"),
                ("a", "d"), ("b", "d"), ("c", "d"),
                ("a", "e"), ("b", "e"), ("c", "e"),
            ],
        )
        t = decompose(g, 4)
        obj = t.to_obj()
        back = ComponentTree.from_obj(obj)
        assert dump_json(back.to_obj()) == dump_json(obj)
        assert back.root == t.root
        assert {n.kind for n in back.nodes.values()} == {KIND_P}

    def test_kind_strings_are_verbatim(self):
        t = decompose(complete_graph("abcd"), 4)
        assert t.to_obj()["nodes"][0]["kind"] == "p-type"
        t2 = decompose(complete_graph("abcde"), 4)
        assert t2.to_obj()["nodes"][0]["kind"] == "c-type"
        assert t2.to_obj()["nodes"][0]["width"] == 4


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_random_graphs_decompose_or_reject(data):
    n = data.draw(st.integers(min_value=2, max_value=7))
    names = [f"v{i}" for i in range(n)]
    pairs = list(itertools.combinations(names, 2))
    chosen = data.draw(
        st.lists(st.sampled_from(pairs), unique=True, min_size=1, max_size=len(pairs))
    )
    g = graph_from_pairs(names, sorted(chosen))
    if not g.is_connected():
        return
    try:
        t = decompose_full(g, 3)
    except StructuralError as exc:
        assert exc.witness is not None or "connected" in str(exc)
        return
    validate_component_tree(t, g)
    for node in t.nodes.values():
        if node.kind == KIND_C:
            assert node.width is not None and node.width <= 3
