"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class SharpQMError(Exception):
    """Base class for library errors."""


class DomainError(SharpQMError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PreconditionError(SharpQMError, ValueError):
    """Input violates a documented precondition."""


class ConvergenceError(SharpQMError, RuntimeError):
    """Iteration or quadrature failed to reach its tolerance.

    Attributes:
        log: Optional diagnostic payload (iteration history, estimates).
    """

    def __init__(self, message: str, log=None):
        super().__init__(message)
        self.log = log


class NodeProximityError(SharpQMError, RuntimeError):
    """A density-weighted quantity was requested too close to a node."""


class StepLimitError(SharpQMError, RuntimeError):
    """Adaptive integrator exceeded its step budget.

    Attributes:
        partial: The partial result accumulated before the limit was hit.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class InvariantError(SharpQMError, RuntimeError):
    """A physical invariant (e.g. subluminal motion) was violated."""


class UnsupportedError(SharpQMError, NotImplementedError):
    """Requested variant is deliberately not supported."""
