"""Exceptions raised by the bpi-tails toolkit.

Every exception carries an ``exit_code`` so the command line can map a
failure to its documented status without a lookup table of its own.

(C) 2025 Stephen Jenkins
"""


class TailsException(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ValidationException(TailsException):
    """Input, parameter or model validation failed."""

    exit_code = 2


class InvalidParameterException(ValidationException):
    """A constructor or operation got a parameter outside its range."""


class InvalidInputException(ValidationException):
    """An input object violates the operation contract (e.g. improper tail)."""


class StabilityException(ValidationException):
    """Mean offspring b >= 1, or the log-moment condition fails."""


class DegenerateModelException(ValidationException):
    """The model is trivial (immigration is identically zero)."""


class NoReferenceTailException(ValidationException):
    """Both ratio constants vanish against the supplied reference tail."""


class ModelInconsistencyException(ValidationException):
    """Case label and mean of immigration disagree (heavy B with infinite a)."""


class SubcriticalityException(ValidationException):
    """Queue mapping with E(xi) + p >= 1."""


class InvalidDriftException(ValidationException):
    """Random walk increments do not have negative mean."""


class GridUnderflowException(ValidationException):
    """A tail evaluated to zero on the grid; the grid must be shrunk."""


class EmptySampleException(ValidationException):
    """An estimator got no samples."""


class NonConvergenceException(TailsException):
    """An iterative computation did not converge."""

    exit_code = 3


class NonConvergentSumException(NonConvergenceException):
    """A geometric-scale tail sum could not be truncated with a valid bound."""


class TruncationOverflowException(NonConvergenceException):
    """Probability mass beyond the truncation bound exceeded its budget."""


class StationaryNonConvergenceException(NonConvergenceException):
    """The stationary iteration hit max_iter."""


class MonotonicityException(NonConvergenceException):
    """Tails of the iterates decreased, breaking stochastic monotonicity."""


class StateOverflowException(NonConvergenceException):
    """A simulated population left the int64 range."""


class UnsupportedRegimeException(TailsException):
    """No asymptotic result covers the model."""

    exit_code = 4


class VerificationFailedException(TailsException):
    """A simulated estimate missed its predicted tolerance on the far grid."""

    exit_code = 5
