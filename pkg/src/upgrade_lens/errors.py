"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes: parse/integrity failures
exit 2, domain errors exit 3, transport errors exit 4.
"""

from __future__ import annotations


class UpgradeLensError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(UpgradeLensError):
    """Malformed input document.

    Carries the 1-based line (and column, when known) of the offending
    record so callers can point at the exact spot.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class IntegrityError(UpgradeLensError):
    """Structurally valid input that violates a graph or dataset invariant."""


class DomainError(UpgradeLensError):
    """Arguments outside an operation's documented domain."""


class TransportError(UpgradeLensError):
    """Network transport failed after the retry policy was exhausted."""
