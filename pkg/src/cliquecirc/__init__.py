"""Nonzero-circulation edge weights for clique-sums of planar and
bounded-treewidth graphs, plus the matching / shortest-path isolation
applications built on top of them."""

from __future__ import annotations

from .errors import (
    CliqueCircError,
    CycleCapExceeded,
    InputError,
    StructuralError,
    VerificationError,
)
from .graph import (
    Cycle,
    DirectedEdge,
    Edge,
    Graph,
    WeightAssignment,
    circulation,
    combine_shifted,
    enumerate_simple_cycles,
)

__version__ = "0.1.0"

__all__ = [
    "CliqueCircError",
    "CycleCapExceeded",
    "Cycle",
    "DirectedEdge",
    "Edge",
    "Graph",
    "InputError",
    "StructuralError",
    "VerificationError",
    "WeightAssignment",
    "circulation",
    "combine_shifted",
    "enumerate_simple_cycles",
    "__version__",
]
