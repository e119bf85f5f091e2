"""Exception types shared across the package."""

from __future__ import annotations


class SqlHinterError(Exception):
    """Base class for all package-specific errors."""


class ParseError(SqlHinterError):
    """Raised when no prefix of the input can be interpreted as a query."""

    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"parse error at position {position}: expected {expected}")


class DecomposeError(SqlHinterError):
    """Raised when asked to decompose a tree that is not a complete query."""


class ExecError(SqlHinterError):
    """Query execution failure.

    kind is one of: UnknownTable, UnknownColumn, Ungrouped, PartialQuery.
    """

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"{kind}: {message}")


class BuildError(SqlHinterError):
    """Raised when an MDP cannot be built at all (e.g. no ideal solutions)."""


class EmptySolution(SqlHinterError):
    """Student query has no select-list content; hints require a non-empty start."""


class NoHintAvailable(SqlHinterError):
    """The graph contains no reachable passing terminal to steer towards."""


class NoEscape(SqlHinterError):
    """No backward ancestor has a forward destination with positive value."""


class StaleHint(SqlHinterError):
    """The hint was generated against a different query than the one supplied."""


class UnknownExercise(SqlHinterError):
    """Exercise id not present in the store."""


class FormatError(SqlHinterError):
    """A single record in an input file is malformed (non-fatal per record)."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


class SchemaError(SqlHinterError):
    """An exercise bundle or schema file violates its invariants."""


class InsufficientPoints(SqlHinterError):
    """A regression window contains fewer than two usable points."""


class Unreachable(SqlHinterError):
    """No passing terminal is reachable from the given state."""
