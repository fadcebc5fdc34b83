"""Instance generator: determinism, round trips, bipartite mode."""

from __future__ import annotations

import pytest

from cliquecirc.decompose import (
    KIND_C,
    classify,
    decompose_full,
    validate_component_tree,
)
from cliquecirc.generate import GenParams, generate_instance
from cliquecirc.graph import VIRTUAL
from cliquecirc.jsonio import dump_json, graph_to_obj


def two_color(graph):
    """Independent BFS 2-coloring; returns colors or None."""
    colors = {}
    for start in sorted(graph.vertices):
        if start in colors:
            continue
        colors[start] = 0
        queue = [start]
        while queue:
            v = queue.pop()
            for w, _ in graph.adjacency[v]:
                if w not in colors:
                    colors[w] = 1 - colors[v]
                    queue.append(w)
                elif colors[w] == colors[v]:
                    return None
    return colors


def test_single_piece_trivial_tree():
    g, t = generate_instance(5, GenParams(num_pieces=1))
    assert len(t.nodes) == 1 and not t.edges
    node = t.nodes[0]
    reals = {eid for eid, e in node.graph.edges.items() if e.tag != VIRTUAL}
    assert set(g.edges) == reals
    assert g.vertices == node.graph.vertices


def test_deterministic_in_seed():
    params = GenParams(num_pieces=5)
    g1, t1 = generate_instance(42, params)
    g2, t2 = generate_instance(42, params)
    assert dump_json(graph_to_obj(g1)) == dump_json(graph_to_obj(g2))
    assert dump_json(t1.to_obj()) == dump_json(t2.to_obj())


def test_seeds_differ():
    params = GenParams(num_pieces=5)
    blobs = {
        dump_json(graph_to_obj(generate_instance(s, params)[0]))
        for s in range(6)
    }
    assert len(blobs) > 1


@pytest.mark.parametrize("seed", range(12))
def test_ground_truth_tree_is_valid(seed):
    g, t = generate_instance(seed, GenParams(num_pieces=4))
    assert g.is_connected()
    validate_component_tree(t, g)


@pytest.mark.parametrize("seed", range(8))
def test_decompose_round_trip(seed):
    g, _ = generate_instance(seed, GenParams(num_pieces=3))
    t = decompose_full(g, 4)
    validate_component_tree(t, g)
    for node in t.nodes.values():
        assert classify(node.graph, 4) == node.kind
        if node.kind == KIND_C:
            assert node.width is not None and node.width <= 4


@pytest.mark.parametrize("seed", range(10))
def test_bipartite_mode(seed):
    g, t = generate_instance(seed, GenParams(num_pieces=4, bipartite=True))
    colors = two_color(g)
    assert colors is not None
    assert g.bipartition is not None
    left, right = g.bipartition
    for e in g.edges.values():
        assert (e.u in left) != (e.v in left)
    for te in t.edges:
        assert len(te.sep) <= 2
    validate_component_tree(t, g)


def test_vertex_cap_respected():
    params = GenParams(num_pieces=40, max_vertices=30)
    g, _ = generate_instance(3, params)
    # one piece may land just past the cap before assembly stops
    assert g.num_vertices <= 30 + 10


def test_family_exercises_parallels_and_reuse():
    saw_parallel = False
    saw_reuse = False
    saw_c_node = False
    for seed in range(60):
        g, t = generate_instance(
            seed, GenParams(num_pieces=6, p_parallel=0.3, p_reuse_set=0.3)
        )
        pair_counts = {}
        for e in g.edges.values():
            pair = frozenset((e.u, e.v))
            pair_counts[pair] = pair_counts.get(pair, 0) + 1
        if any(c > 1 for c in pair_counts.values()):
            saw_parallel = True
        sep_counts = {}
        for te in t.edges:
            sep_counts[te.sep] = sep_counts.get(te.sep, 0) + 1
        if any(c > 1 for c in sep_counts.values()):
            saw_reuse = True
        if any(n.kind == KIND_C for n in t.nodes.values()):
            saw_c_node = True
    assert saw_parallel and saw_reuse and saw_c_node


@pytest.mark.parametrize("seed", range(6))
def test_small_width_locals_stay_small(seed):
    g, t = generate_instance(seed, GenParams(num_pieces=8, max_vertices=40))
    for node in t.nodes.values():
        if node.kind == KIND_C:
            assert node.graph.num_vertices <= 6
            assert len(node.separating_sets) <= 3
