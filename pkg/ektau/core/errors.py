"""
Exception hierarchy for the numerical core.

Tool functions in ``ektau.tools`` turn these into status dicts; ``error_kind``
tells the runner which exit status to use.
"""

from __future__ import annotations

from typing import Sequence


class EKTauError(Exception):
    """Base class for every error raised by ektau."""

    error_kind = "validation"


class ChartDomainError(EKTauError):
    """A point lies outside the coordinate chart {1 + (kappa/4)(x^2+y^2) > 0}."""


class UnsupportedSpaceError(EKTauError):
    """The requested object only exists for some (kappa, tau)."""


class NumericalError(EKTauError):
    """A field or sample could not be differentiated (non-finite values)."""


class DegeneracyError(NumericalError):
    """The differential of an immersion dropped rank."""

    def __init__(self, message: str, singular_values: Sequence[float] = ()):
        super().__init__(message)
        self.singular_values = tuple(float(s) for s in singular_values)


class ContractViolationError(EKTauError):
    """An input breaks an operation's contract (e.g. nonzero boundary data)."""


class ResolutionError(EKTauError):
    """A quadrature or grid is too coarse for the requested computation."""


class PreconditionError(EKTauError):
    """A hypothesis of a check is not met (e.g. v <= 0)."""


class ChainViolationError(EKTauError):
    """An inequality of the Jacobi-pair estimate chain failed although its hypothesis held."""


class SolverError(EKTauError):
    """An iterative solver failed to converge or hit a singular system."""

    error_kind = "solver"

    def __init__(self, message: str, history: Sequence[float] = ()):
        super().__init__(message)
        self.history = [float(r) for r in history]


class ConfigError(EKTauError):
    """Malformed job configuration."""

    def __init__(self, message: str, field: str = "", line: int | None = None, column: int | None = None):
        location = ""
        if line is not None:
            location = f" (line {line}, column {column})"
        elif field:
            location = f" (field '{field}')"
        super().__init__(f"{message}{location}")
        self.field = field
        self.line = line
        self.column = column


def error_result(exc: BaseException) -> dict:
    """Status dict for a failed tool call."""
    kind = getattr(exc, "error_kind", "validation")
    result = {"status": "error", "error_kind": kind, "message": str(exc) or type(exc).__name__}
    history = getattr(exc, "history", None)
    if history:
        result["history"] = list(history)
    return result
