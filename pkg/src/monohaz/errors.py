"""Exception and warning types raised by monohaz.

Two families exist so that callers (and the CLI) can tell bad input apart
from numerical trouble: :class:`InputError` subclasses describe data or
argument problems, :class:`NumericalError` subclasses describe failures of
an otherwise well-posed computation.
"""


class MonohazError(Exception):
    """Base class for all monohaz errors."""


class InputError(MonohazError, ValueError):
    """Invalid data or arguments."""


class ParseError(InputError):
    """A CSV cell could not be parsed as a finite number."""


class ValidationError(InputError):
    """Data or arguments violate a documented precondition."""


class TieError(ValidationError):
    """Two or more follow-up times coincide."""

    def __init__(self, message, values=()):
        super().__init__(message)
        self.values = tuple(values)


class OutOfRangeError(ValidationError):
    """The point ``x0`` is not strictly inside ``(T_(1), T_(n))``."""


class BoundaryError(ValidationError):
    """The point ``x0`` coincides with an observed follow-up time."""


class NoEventsError(ValidationError):
    """The sample contains no uncensored observation where one is needed."""


class NumericalError(MonohazError, ArithmeticError):
    """A numerical procedure failed."""


class SingularHessianError(NumericalError):
    pass


class DegenerateSegmentError(NumericalError):
    """A cumulative sum diagram has a segment with zero x-increment."""


class DerivativeUnavailableError(NumericalError):
    """Fewer than two distinct hazard levels; no derivative estimate exists."""


class MinusInfinityError(NumericalError):
    """An event falls where the hazard is zero, so the loglikelihood is -inf.

    :func:`monohaz.inference.loglik` returns ``-inf`` instead of raising this
    unless called with ``strict=True``.
    """


class InternalConsistencyError(NumericalError):
    """A result violates an identity that holds for any correct fit."""


class BoundaryWarning(UserWarning):
    """A Monte Carlo quantity reached the edge of the simulation grid."""
