"""Exception hierarchy.

Every error raised by the library derives from :class:`CausalTheoryError`.
The four intermediate classes group errors by failure class so that the
command-line front end can map them onto exit codes.
"""

from __future__ import annotations


class CausalTheoryError(Exception):
    """Base class for all library errors."""


class InvariantError(CausalTheoryError):
    """A value failed one of its structural or numerical invariants."""


class NameLookupError(CausalTheoryError, KeyError):
    """A variable, factor or outcome name could not be resolved."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message
        return Exception.__str__(self)


class ExpressionError(CausalTheoryError):
    """Two argument sets that must be disjoint overlap, or an expression is malformed."""


# causal structures


class CycleDetected(InvariantError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("cycle detected: " + " -> ".join(cycle))


class DuplicateVertex(InvariantError):
    pass


class SelfLoop(InvariantError):
    pass


class DuplicateArrow(InvariantError):
    pass


class UnknownVertexName(NameLookupError):
    pass


class IndexOutOfRange(InvariantError, IndexError):
    pass


class SubsetsNotDisjoint(ExpressionError):
    pass


class OverlappingSubsets(ExpressionError):
    pass


# diagrams


class CodomainMismatch(InvariantError):
    pass


class MalformedDiagram(InvariantError):
    pass


# matrices and distributions


class ShapeMismatch(InvariantError):
    pass


class NotStochastic(InvariantError):
    pass


class NotDeterministic(InvariantError):
    pass


class NotADistribution(InvariantError):
    pass


class UnknownFactor(NameLookupError):
    pass


class DisjointnessViolated(ExpressionError):
    pass


# models


class ModelMismatch(InvariantError):
    pass


class FactorMismatch(InvariantError):
    pass


class StructureMismatch(InvariantError):
    pass


class InvalidMorphism(InvariantError):
    pass


# files


class FileFormatError(CausalTheoryError):
    """A file could not be read or does not follow the expected layout."""


class InvalidFile(InvariantError):
    """A file parsed but describes an invalid object."""
