"""Exception hierarchy shared by all rfrac modules."""

from __future__ import annotations


class RfracError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(RfracError, ValueError):
    """An input parameter is outside its admissible range."""


class DomainError(RfracError, ValueError):
    """A point lies outside the set where an operation is defined."""


class SingularityError(RfracError, ValueError):
    """Evaluation requested at a point where the quantity blows up."""


class ShapeError(RfracError, ValueError):
    """Fields or matrices do not live on the same mesh."""


class ToleranceError(RfracError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SolvabilityError(RfracError, RuntimeError):
    """The shifted stiffness matrix is not positive definite."""

    def __init__(self, message: str, smallest_eigenvalue: float):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class ConvergenceError(RfracError, RuntimeError):
    """An iteration stopped at ``max_iter`` without converging."""

    def __init__(self, message: str, last_iterate=None, last_value: float = float("nan")):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.last_value = last_value


class InsufficientResolutionError(RfracError, ValueError):
    """Too few mesh nodes fall inside a fitting window."""


class PreconditionError(RfracError, ValueError):
    """A field violates a sign requirement; ``node`` is the offending index."""

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message)
        self.node = node


class MeshError(RfracError, ValueError):
    """A mesh could not be represented in double precision."""
