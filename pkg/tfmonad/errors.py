"""
Error Types
Exception hierarchy shared by the services and the CLI.
"""
from typing import Optional


class TanMonadError(Exception):
    """Base class for every error raised by tfmonad."""


class ParseError(TanMonadError):
    """Malformed expression, polynomial or spec input."""

    def __init__(self, message: str, text: str = "", position: Optional[int] = None):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(self.describe())

    def describe(self) -> str:
        if self.position is None:
            return self.message
        caret = " " * self.position + "^"
        return f"position {self.position}: {self.message}\n  {self.text}\n  {caret}"


class DomainViolationError(TanMonadError):
    """An evaluation left the chart domain or a primitive's real domain."""


class BackendError(TanMonadError):
    """An operation is not available on the selected scalar backend."""


class AlgebraMismatchError(TanMonadError):
    """Weil elements from different algebras were combined."""


class InvalidWeilAlgebraError(TanMonadError):
    """Structure constants fail commutativity, associativity, unit or nilpotency checks."""


class ShapeMismatchError(TanMonadError):
    """Arity or matrix shape does not fit the operation."""


class FloatRejectedError(TanMonadError):
    """Floats are passed where only exact rationals are accepted."""


class SamplingError(TanMonadError):
    """Too many samples were rejected while drawing points in the domain."""


class FlowError(TanMonadError):
    """Base class for integrator failures."""


class DomainExitError(FlowError):
    """The integrated trajectory left the vector field's domain."""


class StepBudgetExceededError(FlowError):
    """The requested time needs more steps than max_steps allows."""


class DegenerateRank1Error(TanMonadError):
    """The time one-form vanishes at a sample, so the algebra is not regular of rank 1."""


class NotTameError(TanMonadError):
    """The Jacobian rank dropped below the leaf dimension along a lift."""


class StepUnderflowError(TanMonadError):
    """Path continuation halved its step below the minimum."""


class PathNotInLeafError(TanMonadError):
    """A path sample lies farther from the leaf than the tolerance."""


class LoopNotClosedError(TanMonadError):
    """A holonomy loop does not return to its base point."""


class NoAntipodeError(TanMonadError):
    """The affine bimonad has no antipode because 1 + ab = 0."""
