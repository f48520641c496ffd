"""Exception types shared across the pipeline.

Argument and shape problems raise plain ``ValueError``. Failures that come
from the numbers themselves derive from :class:`NumericalError` so the CLI
can map them to a distinct exit code.
"""


class NumericalError(ArithmeticError):
    """Base class for failures caused by ill-conditioned numerical input."""


class DegenerateSignalError(NumericalError):
    """The signal carries no variance (zero-lag autocorrelation <= 0)."""


class ConditioningError(NumericalError):
    """The autocorrelation sequence is not positive definite."""


class DegenerateVarianceError(NumericalError):
    """Paired differences have zero spread but a nonzero mean."""
