"""JSON (de)serialization for graphs, weights, and reports.

All dumps are deterministic: keys sorted, two-space indent, trailing
newline.  Weights are serialized as signed decimal strings because the
integers routinely exceed 2^53 and must survive readers that parse
numbers as doubles.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any

from .errors import InputError
from .graph import Edge, Graph, WeightAssignment

_DECIMAL = re.compile(r"^-?(0|[1-9][0-9]*)$")


def dump_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dump_json(obj))


def load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def _require_keys(obj: Any, required: set[str], optional: set[str], what: str) -> None:
    if not isinstance(obj, dict):
        raise InputError(f"{what}: expected an object, got {type(obj).__name__}")
    missing = required - obj.keys()
    if missing:
        raise InputError(f"{what}: missing keys {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise InputError(f"{what}: unknown keys {sorted(unknown)}")


def graph_to_obj(g: Graph) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "vertices": sorted(g.vertices),
        "edges": [
            {"id": e.id, "u": e.u, "v": e.v, "tag": e.tag} for e in g.sorted_edges()
        ],
    }
    if g.bipartition is not None:
        obj["bipartition"] = {
            "left": sorted(g.bipartition[0]),
            "right": sorted(g.bipartition[1]),
        }
    return obj


def graph_from_obj(obj: Any) -> Graph:
    _require_keys(obj, {"vertices", "edges"}, {"bipartition"}, "graph")
    if not isinstance(obj["vertices"], list):
        raise InputError("graph: 'vertices' must be a list")
    edges = []
    for i, eo in enumerate(obj["edges"]):
        _require_keys(eo, {"id", "u", "v"}, {"tag"}, f"graph edge #{i}")
        edges.append(Edge(eo["id"], eo["u"], eo["v"], eo.get("tag", "real")))
    bip = None
    if "bipartition" in obj:
        bo = obj["bipartition"]
        _require_keys(bo, {"left", "right"}, set(), "bipartition")
        bip = (bo["left"], bo["right"])
    return Graph(obj["vertices"], edges, bip)


def weights_to_obj(w: WeightAssignment) -> dict[str, str]:
    return {eid: str(val) for eid, val in w.items()}


def weights_from_obj(obj: Any) -> WeightAssignment:
    if not isinstance(obj, dict):
        raise InputError("weights: expected an object of edge_id -> decimal string")
    out: dict[str, int] = {}
    for eid, s in obj.items():
        if not isinstance(s, str) or not _DECIMAL.match(s):
            raise InputError(f"weights[{eid!r}]: not a signed decimal string: {s!r}")
        out[eid] = int(s)
    return WeightAssignment(out)


def load_graph(path: str | Path) -> Graph:
    return graph_from_obj(load_json(path))


def load_weights(path: str | Path) -> WeightAssignment:
    return weights_from_obj(load_json(path))
