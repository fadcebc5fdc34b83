"""Command line driver: artifact round-trips, exit codes, stage tagging."""

from __future__ import annotations

import itertools
import json

import pytest

from cliquecirc.cli import main
from cliquecirc.decompose import KIND_P, ComponentNode, ComponentTree, TreeEdge
from cliquecirc.graph import VIRTUAL, Edge, Graph
from cliquecirc.jsonio import graph_to_obj, load_json, write_json


def write_graph(g: Graph, path) -> str:
    write_json(graph_to_obj(g), str(path))
    return str(path)


def square(bipartite: bool = True) -> Graph:
    ring = [("v0", "v1"), ("v1", "v2"), ("v2", "v3"), ("v3", "v0")]
    return Graph(
        ["v0", "v1", "v2", "v3"],
        [Edge(f"e{i}", u, v) for i, (u, v) in enumerate(ring)],
        bipartition=(["v0", "v2"], ["v1", "v3"]) if bipartite else None,
    )


def two_k4() -> Graph:
    # two tetrahedra glued on the triangle a,b,c
    pairs = [
        ("a", "b"), ("a", "c"), ("b", "c"),
        ("a", "d"), ("b", "d"), ("c", "d"),
        ("a", "e"), ("b", "e"), ("c", "e"),
    ]
    return Graph("abcde", [Edge(f"e{i}", u, v) for i, (u, v) in enumerate(pairs)])


def wheel_node(nid: int, apex: str, prefix: str) -> ComponentNode:
    edges = [
        Edge(f"{prefix}_ab", "a", "b", VIRTUAL),
        Edge(f"{prefix}_ac", "a", "c", VIRTUAL),
        Edge(f"{prefix}_bc", "b", "c", VIRTUAL),
    ] + [Edge(f"{apex}{v}", apex, v) for v in "abc"]
    return ComponentNode(
        nid, KIND_P, Graph("abc" + apex, edges),
        separating_sets=[frozenset("abc")],
    )


def crossing_tree() -> ComponentTree:
    """Two pieces over one shared triangle whose host cannot keep it facial.

    The host puts two apexes on the same chord triangle, so any drawing
    routes one of them across it; the piece normal form has to split the
    host before weights can be built.
    """
    host_edges = (
        [
            Edge("t_ab", "a", "b", VIRTUAL),
            Edge("t_ac", "a", "c", VIRTUAL),
            Edge("t_bc", "b", "c", VIRTUAL),
        ]
        + [Edge(f"x{v}", "x", v) for v in "abc"]
        + [Edge(f"y{v}", "y", v) for v in "abc"]
    )
    host = ComponentNode(
        0, KIND_P, Graph("abcxy", host_edges),
        separating_sets=[frozenset("abc")],
    )
    return ComponentTree(
        {0: host, 1: wheel_node(1, "d", "u")},
        [TreeEdge(0, 1, frozenset("abc"))],
        0,
    )


class TestGenerate:
    def test_deterministic_artifact(self, tmp_path, capsys):
        args = ["generate", "--seed", "7", "--pieces", "3",
                "--max-vertices", "20"]
        p1, p2 = tmp_path / "g1.json", tmp_path / "g2.json"
        assert main(args + ["--out", str(p1)]) == 0
        assert main(args + ["--out", str(p2)]) == 0
        assert p1.read_bytes() == p2.read_bytes()
        out = capsys.readouterr().out
        assert "seed 7: graph with 13 vertices, 22 edges" in out

    def test_bipartite_flag_carries_through(self, tmp_path, capsys):
        out_path = tmp_path / "g.json"
        code = main([
            "generate", "--seed", "3", "--pieces", "2", "--max-vertices",
            "16", "--bipartite", "--out", str(out_path),
        ])
        assert code == 0
        obj = load_json(str(out_path))
        assert set(obj["bipartition"]) == {"left", "right"}
        assert "bipartite graph with 10 vertices, 11 edges" in capsys.readouterr().out

    def test_missing_out_flag_is_a_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--seed", "1"])
        assert exc.value.code == 2


class TestPipelineChain:
    """generate -> decompose -> weigh -> verify -> paths on a frozen seed."""

    @pytest.fixture()
    def seeded(self, tmp_path, capsys):
        gp = tmp_path / "g.json"
        assert main(["generate", "--seed", "7", "--pieces", "3",
                     "--max-vertices", "20", "--out", str(gp)]) == 0
        capsys.readouterr()
        return gp

    def test_decompose_reports_piece_kinds(self, seeded, tmp_path, capsys):
        dp = tmp_path / "dec.json"
        assert main(["decompose", "--graph", str(seeded), "--out", str(dp)]) == 0
        assert "decomposed into 8 pieces (8 p-type)" in capsys.readouterr().out
        obj = load_json(str(dp))
        assert len(obj["nodes"]) == 8

    def test_weigh_then_verify_then_paths(self, seeded, tmp_path, capsys):
        wp = tmp_path / "w.json"
        assert main(["weigh", "--graph", str(seeded), "--out", str(wp)]) == 0
        out = capsys.readouterr().out
        assert "weighted 22 edges, max 35 bits; 53 cycles checked" in out
        assert "PASS: every cycle has nonzero circulation" in out

        vp = tmp_path / "rep.json"
        assert main(["verify", "--graph", str(seeded), "--weights", str(wp),
                     "--out", str(vp)]) == 0
        assert "PASS: 53 cycles all nonzero" in capsys.readouterr().out
        rep = load_json(str(vp))
        assert sorted(rep) == [
            "cycles_total", "lemma4_violations", "lemma5_violations",
            "max_bits", "min_abs_circulation", "zero_witnesses",
        ]
        assert rep["cycles_total"] == 53
        assert rep["zero_witnesses"] == []
        assert rep["max_bits"] == 35

        pp = tmp_path / "paths.json"
        assert main(["paths", "--graph", str(seeded), "--weights", str(wp),
                     "--out", str(pp)]) == 0
        assert "all 156 ordered pairs" in capsys.readouterr().out

    def test_verify_accepts_bare_weight_map(self, seeded, tmp_path, capsys):
        wp = tmp_path / "w.json"
        main(["weigh", "--graph", str(seeded), "--out", str(wp)])
        bare = tmp_path / "bare.json"
        bare.write_text(json.dumps(load_json(str(wp))["weights"]))
        capsys.readouterr()
        assert main(["verify", "--graph", str(seeded), "--weights", str(bare),
                     "--out", str(tmp_path / "r.json")]) == 0


class TestGoldenManifest:
    def test_two_k4_weights_are_stable(self, tmp_path, capsys):
        gp = write_graph(two_k4(), tmp_path / "g.json")
        wp = tmp_path / "man.json"
        assert main(["weigh", "--graph", gp, "--out", str(wp)]) == 0
        assert "9 edges, max 9 bits; 22 cycles" in capsys.readouterr().out
        man = load_json(str(wp))
        assert man["weights"] == {
            "e0": "-273", "e1": "273", "e2": "-273",
            "e3": "274", "e4": "-274", "e5": "0",
            "e6": "1", "e7": "-1", "e8": "0",
        }
        assert man["K"] == 8
        assert man["m"] == 0
        assert man["B_shift"] == "17"
        assert man["max_bits"] == 9
        assert sorted(man["stages"]) == [
            "bag_tree", "bag_weights", "component_tree",
            "gadget_map", "glued_weights", "input",
        ]


class TestTreeBypass:
    def test_crossing_tree_is_refused_with_stage_tag(self, tmp_path, capsys):
        tp = tmp_path / "tree.json"
        write_json(crossing_tree().to_obj(), str(tp))
        code = main(["weigh", "--tree", str(tp), "--out", str(tmp_path / "m.json")])
        assert code == 3
        err = capsys.readouterr().err
        assert err.startswith("structural failure: [weights]")
        assert "triangle bounds no face" in err

    def test_normalize_repairs_then_weighs(self, tmp_path, capsys):
        tp = tmp_path / "tree.json"
        write_json(crossing_tree().to_obj(), str(tp))
        np_ = tmp_path / "norm.json"
        assert main(["normalize", "--tree", str(tp), "--out", str(np_)]) == 0
        assert "4 pieces, 9 rewritten edges" in capsys.readouterr().out
        mp = tmp_path / "man.json"
        assert main(["weigh", "--tree", str(np_), "--out", str(mp)]) == 0
        out = capsys.readouterr().out
        assert "weighted 18 edges, max 29 bits; 15 cycles checked" in out
        assert "PASS" in out
        assert len(load_json(str(mp))["weights"]) == 18


class TestIsolationCommands:
    @pytest.fixture()
    def bip(self, tmp_path, capsys):
        gp = tmp_path / "g.json"
        main(["generate", "--seed", "3", "--pieces", "2", "--max-vertices",
              "16", "--bipartite", "--out", str(gp)])
        wp = tmp_path / "w.json"
        assert main(["weigh", "--graph", str(gp), "--out", str(wp)]) == 0
        capsys.readouterr()
        return gp, wp

    def test_match_isolates_frozen_instance(self, bip, tmp_path, capsys):
        gp, wp = bip
        mp = tmp_path / "match.json"
        assert main(["match", "--graph", str(gp), "--weights", str(wp),
                     "--out", str(mp)]) == 0
        assert "unique minimum among 3 perfect matchings" in capsys.readouterr().out
        rep = load_json(str(mp))
        assert rep["perfect_matchings"] == 3
        assert rep["min_weight"] == "-596"
        assert rep["unique_min"] is not None
        assert rep["ties"] == []

    def test_dyn_update_insert_list(self, bip, tmp_path, capsys):
        gp, wp = bip
        ip = tmp_path / "ins.json"
        ip.write_text(json.dumps([
            {"id": "n0", "u": "v00", "v": "v05"},
            {"id": "n1", "u": "v00", "v": "v07"},
        ]))
        dp = tmp_path / "dyn.json"
        assert main(["dyn-update", "--graph", str(gp), "--weights", str(wp),
                     "--insert", str(ip), "--out", str(dp)]) == 0
        assert "batch of 2: candidate 0 (primes [3]) isolates" in capsys.readouterr().out
        rep = load_json(str(dp))
        assert rep["batch"] == 2
        assert rep["stages"] == 1
        assert rep["candidates_total"] == 5
        assert rep["chosen"] == {"base": "852491", "index": 0, "primes": [3]}
        assert {"n0", "n1"} <= set(rep["weights"])

    def test_dyn_update_deletion_only(self, bip, tmp_path, capsys):
        gp, wp = bip
        gone = load_json(str(gp))["edges"][0]["id"]
        ip = tmp_path / "ins.json"
        ip.write_text(json.dumps({"insert": [], "delete": [gone]}))
        dp = tmp_path / "dyn.json"
        assert main(["dyn-update", "--graph", str(gp), "--weights", str(wp),
                     "--insert", str(ip), "--out", str(dp)]) == 0
        assert "deletion-only step: kept old weights on 10 edges" in capsys.readouterr().out
        rep = load_json(str(dp))
        assert rep["chosen"] is None
        assert rep["candidates_total"] == 0
        assert gone not in rep["weights"]
        assert len(rep["weights"]) == 10


class TestFailureExits:
    @pytest.fixture()
    def zeroed(self, tmp_path):
        gp = write_graph(square(), tmp_path / "g.json")
        zp = tmp_path / "zero.json"
        zp.write_text(json.dumps({f"e{i}": "0" for i in range(4)}))
        return gp, str(zp)

    def test_zero_circulation_fails_verify(self, zeroed, tmp_path, capsys):
        gp, zp = zeroed
        vp = tmp_path / "rep.json"
        assert main(["verify", "--graph", gp, "--weights", zp,
                     "--out", str(vp)]) == 1
        assert "FAIL: zero circulation on cycle" in capsys.readouterr().out
        assert load_json(str(vp))["zero_witnesses"] == [["e0", "e1", "e2", "e3"]]

    def test_matching_tie_fails_match(self, zeroed, tmp_path, capsys):
        gp, zp = zeroed
        assert main(["match", "--graph", gp, "--weights", zp,
                     "--out", str(tmp_path / "m.json")]) == 1
        assert "FAIL: matchings tie at the minimum" in capsys.readouterr().out

    def test_path_tie_fails_paths(self, zeroed, tmp_path, capsys):
        gp, zp = zeroed
        assert main(["paths", "--graph", gp, "--weights", zp,
                     "--out", str(tmp_path / "p.json")]) == 1
        assert "FAIL: two minimum paths from v0 to v2" in capsys.readouterr().out

    def test_malformed_json_is_an_input_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        zp = tmp_path / "z.json"
        zp.write_text("{}")
        assert main(["verify", "--graph", str(bad), "--weights", str(zp),
                     "--out", str(tmp_path / "r.json")]) == 2
        err = capsys.readouterr().err
        assert err.startswith("input error:")
        assert "invalid JSON at line 1" in err

    def test_weights_missing_edges(self, zeroed, tmp_path, capsys):
        gp, _ = zeroed
        part = tmp_path / "part.json"
        part.write_text(json.dumps({"e0": "1"}))
        assert main(["verify", "--graph", gp, "--weights", str(part),
                     "--out", str(tmp_path / "r.json")]) == 2
        assert "weights missing edges: e1, e2, e3" in capsys.readouterr().err

    def test_undecomposable_graph_names_the_stage(self, tmp_path, capsys):
        k6 = Graph(
            "abcdef",
            [Edge(f"k{i}", u, v)
             for i, (u, v) in enumerate(itertools.combinations("abcdef", 2))],
        )
        gp = write_graph(k6, tmp_path / "k6.json")
        assert main(["weigh", "--graph", gp,
                     "--out", str(tmp_path / "m.json")]) == 3
        err = capsys.readouterr().err
        assert err.startswith("structural failure: [decompose]")

    def test_dyn_update_rejects_unknown_endpoint(self, zeroed, tmp_path, capsys):
        gp, zp = zeroed
        ip = tmp_path / "ins.json"
        ip.write_text(json.dumps([{"id": "n0", "u": "v0", "v": "zz"}]))
        assert main(["dyn-update", "--graph", gp, "--weights", zp,
                     "--insert", str(ip), "--out", str(tmp_path / "d.json")]) == 2
        assert "input error:" in capsys.readouterr().err
