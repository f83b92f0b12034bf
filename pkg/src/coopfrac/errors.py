"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` for bad inputs (the CLI
maps it to exit code 1) and ``NumericalError`` for solver failures (exit
code 2, with a diagnostic payload).
"""

from __future__ import annotations


class CoopFracError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CoopFracError, ValueError):
    """Input data violates a documented precondition."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class UnsupportedDomainError(ValidationError):
    pass


class ResolutionTooCoarseError(ValidationError):
    pass


class GridMismatchError(ValidationError):
    pass


class CooperativityError(ValidationError):
    """Off-diagonal coupling is not strictly negative (condition (A2))."""


class NonConstantFieldError(ValidationError):
    pass


class NestingError(ValidationError):
    pass


class NumericalError(CoopFracError, RuntimeError):
    """A numerical procedure failed; ``diagnostics`` is JSON-serializable."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)


class ConvergenceError(NumericalError):
    pass


class BracketError(NumericalError):
    pass


class StaleEigenpairError(NumericalError):
    pass


class SingularOperatorError(NumericalError):
    pass


class NonExistence(NumericalError):
    """No positive steady state exists (basic reproduction number at most 1)."""


class InvariantBreach(NumericalError):
    pass


class TrajectoryTooShort(ValidationError):
    pass
