"""Exception hierarchy shared by the solvers, the CAA loop and the CLI.

Argument errors (bad shapes, degenerate intervals, non-finite input) are plain
``ValueError``. The classes below mark failures the CLI maps to distinct exit
codes: ``DomainError`` is a usage problem, the others are numerical failures.
"""

from typing import Any, Optional


class CaaError(Exception):
    """Base class for library errors."""


class DomainError(CaaError, ValueError):
    """A closed form was requested outside the range where it holds."""


class InfeasibleError(CaaError):
    """The optimization problem has an empty feasible set."""


class UnboundedError(CaaError):
    """The linear program is unbounded below."""


class ConvergenceError(CaaError):
    """An iterative solver hit its iteration cap.

    Attributes:
        best: Best feasible solution found before giving up (may be None).
        iterations: Number of iterations performed.
    """

    def __init__(self, message: str, *, best: Optional[Any] = None, iterations: int = 0) -> None:
        super().__init__(message)
        self.best = best
        self.iterations = iterations


class DivergenceError(CaaError):
    """An iterate became non-finite; ``trace`` holds what was computed so far."""

    def __init__(self, message: str, *, trace: Optional[Any] = None) -> None:
        super().__init__(message)
        self.trace = trace


__all__ = [
    "CaaError",
    "ConvergenceError",
    "DivergenceError",
    "DomainError",
    "InfeasibleError",
    "UnboundedError",
]
