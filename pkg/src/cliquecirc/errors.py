"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CliqueCircError(Exception):
    """Base class for every failure this library raises on purpose."""


class InputError(CliqueCircError):
    """Malformed data or parameter values that cannot be worked with."""


class StructuralError(CliqueCircError):
    """A graph or tree violates a structural requirement of the pipeline.

    Carries an optional ``witness`` payload (vertices, edges, or a
    subtree id) naming the offending substructure.
    """

    def __init__(self, message: str, witness: object | None = None) -> None:
        super().__init__(message)
        self.witness = witness


class VerificationError(CliqueCircError):
    """A brute-force audit found a counterexample.

    ``witness`` carries the offending objects, e.g. two tied matchings.
    """

    def __init__(self, message: str, witness: object | None = None) -> None:
        super().__init__(message)
        self.witness = witness


class CycleCapExceeded(InputError):
    """Simple-cycle enumeration hit the configured cap before finishing."""
