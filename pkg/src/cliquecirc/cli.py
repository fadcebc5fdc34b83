"""Command line front end.

Subcommands cover the whole pipeline: instance generation, decomposition,
normalization, weight construction, verification, the two isolation
applications, and batch-insert reweighting.  Machine artifacts go to
files named by --out; standard output carries a short human summary.

Exit codes: 0 pass, 1 verification failure, 2 bad input, 3 structural or
internal failure.  All output is deterministic given the same inputs and
seed.  The lemma audit counters in a file-based `verify` report are zero
by construction: those audits need the internal construction objects and
run during `weigh`.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .decompose import ComponentTree, decompose_full, merge_ctype_neighbors
from .dynamic import dyn_update, num_stages
from .errors import (
    CliqueCircError,
    InputError,
    StructuralError,
    VerificationError,
)
from .generate import GenParams, generate_instance
from .graph import Edge, Graph, REAL, WeightAssignment
from .jsonio import (
    graph_to_obj,
    load_graph,
    load_json,
    weights_from_obj,
    weights_to_obj,
    write_json,
)
from .matching import matching_weights, verify_isolation
from .normalize import GadgetMap, normalize
from .paths import unique_shortest_paths
from .pullback import end_to_end, PipelineResult, _stage
from .verify import verify_nonzero_circulation, verify_skew_symmetry


def _load_weights_file(path: str) -> WeightAssignment:
    """Accept either a bare weight map or a weigh manifest."""
    obj = load_json(path)
    if isinstance(obj, dict) and isinstance(obj.get("weights"), dict):
        obj = obj["weights"]
    return weights_from_obj(obj)


def _load_tree_file(path: str) -> ComponentTree:
    obj = load_json(path)
    if isinstance(obj, dict) and "tree" in obj:
        obj = obj["tree"]
    return ComponentTree.from_obj(obj)


def _load_batch_file(path: str) -> tuple[list[Edge], list[str]]:
    obj = load_json(path)
    if isinstance(obj, list):
        obj = {"insert": obj}
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected an edge list or an insert/delete object")
    inserts = []
    for row in obj.get("insert", []):
        try:
            inserts.append(
                Edge(row["id"], row["u"], row["v"], row.get("tag", REAL))
            )
        except (TypeError, KeyError) as exc:
            raise InputError(f"{path}: bad edge entry {row!r}") from exc
    deletes = list(obj.get("delete", []))
    return inserts, deletes


def cmd_generate(args) -> int:
    params = GenParams(
        num_pieces=args.pieces,
        width=args.width,
        bipartite=args.bipartite,
        max_vertices=args.max_vertices,
    )
    g, _ = generate_instance(args.seed, params)
    write_json(graph_to_obj(g), args.out)
    kind = "bipartite " if g.bipartition else ""
    print(
        f"seed {args.seed}: {kind}graph with {g.num_vertices} vertices, "
        f"{g.num_edges} edges -> {args.out}"
    )
    return 0


def cmd_decompose(args) -> int:
    g = load_graph(args.graph)
    tree = _stage(
        "decompose", lambda: merge_ctype_neighbors(decompose_full(g, args.width))
    )
    write_json(tree.to_obj(), args.out)
    kinds = {}
    for node in tree.nodes.values():
        kinds[node.kind] = kinds.get(node.kind, 0) + 1
    parts = ", ".join(f"{n} {k}" for k, n in sorted(kinds.items()))
    print(f"decomposed into {len(tree.nodes)} pieces ({parts}) -> {args.out}")
    return 0


def cmd_normalize(args) -> int:
    if args.tree:
        tree0 = _load_tree_file(args.tree)
    else:
        g = load_graph(args.graph)
        tree0 = _stage(
            "decompose", lambda: merge_ctype_neighbors(decompose_full(g, args.width))
        )
    tree, gm = _stage("normalize", normalize, tree0)
    write_json({"tree": tree.to_obj(), "gadget_map": gm.to_obj()}, args.out)
    print(
        f"normalized tree has {len(tree.nodes)} pieces, "
        f"{len(gm.paths)} rewritten edges -> {args.out}"
    )
    return 0


def _pipeline_from_tree(tree: ComponentTree, cap: int, retries: int) -> PipelineResult:
    # bypass input: the tree is taken as already glued, no gadgets behind it
    from .auxtree import build_aux
    from .lift import lift
    from .pullback import (
        build_pullback_map,
        pull_through_gadgets,
        pull_weights,
    )
    from .treedec import build_hybrid
    from .weights import assemble_wprime

    gm = GadgetMap({}, {})
    g0 = tree.glued_graph()
    dec = _stage("bag-tree", build_hybrid, tree)
    lifted = _stage("lift", lift, g0, dec)
    aux = _stage("aux-tree", build_aux, dec)
    wres = _stage(
        "weights", assemble_wprime, tree, lifted, aux, cycle_cap=cap, retries=retries
    )
    pm = _stage("pull-back", build_pullback_map, g0, lifted)
    w_glued = _stage("pull-back", pull_weights, wres.weights, pm)
    w0 = _stage("gadget-pull", pull_through_gadgets, w_glued, gm, g0)
    return PipelineResult(g0, tree, gm, dec, lifted, aux, wres, pm, w_glued, w0)


def cmd_weigh(args) -> int:
    if args.tree:
        pr = _pipeline_from_tree(_load_tree_file(args.tree), args.cap, args.retries)
    else:
        g = load_graph(args.graph)
        pr = end_to_end(g, args.width, cycle_cap=args.cap, retries=args.retries)
    write_json(pr.manifest_obj(), args.out)
    rep = verify_nonzero_circulation(pr.input_graph, pr.weights, cap=args.cap)
    bits = pr.manifest_obj()["max_bits"]
    print(
        f"weighted {pr.input_graph.num_edges} edges, max {bits} bits; "
        f"{rep['cycles_total']} cycles checked -> {args.out}"
    )
    if rep["zero_witnesses"]:
        print(f"FAIL: zero circulation on cycle {rep['zero_witnesses'][0]}")
        return 1
    print("PASS: every cycle has nonzero circulation")
    return 0


def cmd_verify(args) -> int:
    g = load_graph(args.graph)
    w = _load_weights_file(args.weights)
    missing = sorted(set(g.edges) - set(w.weights))
    if missing:
        raise InputError(f"weights missing edges: {', '.join(missing)}")
    verify_skew_symmetry(w)
    core = verify_nonzero_circulation(g, w, cap=args.cap)
    report = {
        **core,
        "lemma4_violations": 0,
        "lemma5_violations": 0,
        "max_bits": max(
            (abs(v).bit_length() for v in w.weights.values()), default=0
        ),
    }
    write_json(report, args.out)
    if core["zero_witnesses"]:
        print(f"FAIL: zero circulation on cycle {core['zero_witnesses'][0]}")
        return 1
    print(
        f"PASS: {core['cycles_total']} cycles all nonzero, "
        f"smallest magnitude {core['min_abs_circulation']}"
    )
    return 0


def cmd_match(args) -> int:
    g = load_graph(args.graph)
    w = _load_weights_file(args.weights)
    wund = matching_weights(g, w)
    rep = verify_isolation(g, wund)
    out = {
        "perfect_matchings": rep["perfect_matchings"],
        "unique_min": rep["unique_min"],
        "min_weight": rep.get("min_weight"),
        "ties": rep["ties"],
    }
    write_json(out, args.out)
    if rep["ties"]:
        print(f"FAIL: matchings tie at the minimum: {rep['ties'][0]}")
        return 1
    if rep["perfect_matchings"] == 0:
        print("PASS: no perfect matching exists (vacuously isolated)")
    else:
        print(
            f"PASS: unique minimum among {rep['perfect_matchings']} perfect "
            f"matchings, weight {rep['min_weight']}"
        )
    return 0


def cmd_paths(args) -> int:
    g = load_graph(args.graph)
    w = _load_weights_file(args.weights)
    rep = unique_shortest_paths(g, w)
    write_json(rep, args.out)
    if not rep["unique"]:
        t = rep["ties"][0]
        print(f"FAIL: two minimum paths from {t['s']} to {t['t']}")
        return 1
    print(f"PASS: unique shortest path for all {rep['pairs_checked']} ordered pairs")
    return 0


def cmd_dyn_update(args) -> int:
    g = load_graph(args.graph)
    w_old = _load_weights_file(args.weights)
    inserts, deletes = _load_batch_file(args.insert)
    res = dyn_update(g, w_old, inserts, deletes)
    chosen = None
    if res.chosen is not None:
        chosen = {
            "primes": list(res.chosen.primes),
            "index": res.candidates.index(res.chosen),
            "base": str(res.chosen.base),
        }
    out = {
        "batch": res.partition.batch_size,
        "stages": num_stages(res.partition.batch_size),
        "candidates_total": len(res.candidates),
        "chosen": chosen,
        "weights": weights_to_obj(res.weights),
    }
    write_json(out, args.out)
    if res.chosen is None:
        print(f"deletion-only step: kept old weights on {len(res.weights.weights)} edges")
    else:
        print(
            f"batch of {res.partition.batch_size}: candidate {chosen['index']} "
            f"(primes {chosen['primes']}) isolates -> {args.out}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cliquecirc",
        description="nonzero-circulation weights for clique-sums of planar "
        "and bounded-treewidth graphs",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", required=True, metavar="FILE",
                       help="artifact file (JSON)")

    p = sub.add_parser("generate", help="emit a seeded random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--pieces", type=int, default=3)
    p.add_argument("--width", type=int, default=4)
    p.add_argument("--max-vertices", type=int, default=28)
    p.add_argument("--bipartite", action="store_true")
    add_out(p)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("decompose", help="split into planar and small-width pieces")
    p.add_argument("--graph", required=True)
    p.add_argument("--width", type=int, default=4)
    add_out(p)
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("normalize", help="rewrite the piece tree into normal form")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--tree", help="start from a piece-tree artifact instead")
    p.add_argument("--width", type=int, default=4)
    add_out(p)
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("weigh", help="run the full construction, emit the manifest")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--tree", help="weight a piece-tree artifact directly")
    p.add_argument("--width", type=int, default=4)
    p.add_argument("--cap", type=int, default=2_000_000,
                   help="abort above this many cycles")
    p.add_argument("--retries", type=int, default=3)
    add_out(p)
    p.set_defaults(fn=cmd_weigh)

    p = sub.add_parser("verify", help="check circulation of a weight file")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--cap", type=int, default=2_000_000)
    add_out(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("match", help="audit minimum-matching uniqueness")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", required=True)
    add_out(p)
    p.set_defaults(fn=cmd_match)

    p = sub.add_parser("paths", help="audit shortest-path uniqueness")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", required=True)
    add_out(p)
    p.set_defaults(fn=cmd_paths)

    p = sub.add_parser("dyn-update", help="reweight after an edge batch")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", required=True, help="weights before the batch")
    p.add_argument("--insert", required=True,
                   help="JSON edge list, or {insert: [...], delete: [ids]}")
    add_out(p)
    p.set_defaults(fn=cmd_dyn_update)

    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(f"witness: {json.dumps(exc.witness, sort_keys=True)}",
                  file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except StructuralError as exc:
        print(f"structural failure: {exc}", file=sys.stderr)
        return 3
    except CliqueCircError as exc:
        print(f"internal failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
