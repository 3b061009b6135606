"""Exception hierarchy.

Every failure raised by the library derives from :class:`BridgeError`.
Input problems derive from :class:`InputError` and numerical failures from
:class:`NumericalError`; the CLI maps these onto exit codes 2 and 3.
"""

from __future__ import annotations


class BridgeError(Exception):
    """Base class for all library errors."""


class InputError(BridgeError, ValueError):
    """Malformed or inconsistent user input."""


class NumericalError(BridgeError, ArithmeticError):
    """A computation could not produce a usable number."""


class BoundViolation(InputError):
    """A sample lies outside, or exactly on, a parameter bound."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class TooFewSamples(InputError):
    """A chain is too short to be split into two nonempty halves."""


class EmptyChain(InputError):
    """A sampler was asked for zero post-warmup draws."""


class TooFewRepetitions(InputError):
    """A repetition summary needs at least two repetitions."""


class DimensionMismatch(InputError):
    """Arrays or results disagree in shape or repetition count."""


class InvalidPrior(InputError):
    """Prior model probabilities are not a strictly positive simplex."""


class DimensionTooHigh(InputError):
    """Quadrature was requested for more than two dimensions."""


class UnsupportedMethod(InputError):
    """The requested operation is not available for this estimation method."""


class SingularCovariance(NumericalError):
    """The sample covariance is not positive definite, even after jitter."""


class NonFiniteDensity(NumericalError):
    """A log density evaluated to NaN or +inf."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class AllZeroRatios(NumericalError):
    """Every bridge ratio is zero, so no estimate exists."""
