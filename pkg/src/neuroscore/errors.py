"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class NeuroscoreError(Exception):
    """Base class for every error raised by this package."""


class ParseError(NeuroscoreError):
    """A file could not be read according to its schema."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class StructuralError(NeuroscoreError):
    """Well-formed input that violates a structural invariant."""


class NotPresentError(NeuroscoreError, LookupError):
    """A requested subtest span (or other component) is absent."""


class ContractError(NeuroscoreError, ValueError):
    """A caller violated an operation's precondition."""


class ConfigError(NeuroscoreError):
    """A configuration resource is missing or inconsistent."""


class UnscorableError(NeuroscoreError):
    """Not enough evidence in a segment to produce a score.

    Distinct from a score of zero; the evaluation harness drops these pairs.
    """


class UndefinedCorrelationError(NeuroscoreError, ArithmeticError):
    """Correlation of a constant vector."""
