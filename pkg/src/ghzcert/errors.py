"""Exception hierarchy shared by all modules.

Every failure mode raised on purpose derives from :class:`GhzCertError`,
so callers (and the CLI) can tell deliberate contract violations apart
from genuine bugs.
"""


class GhzCertError(Exception):
    """Base class for all errors raised by this package."""


class BadArity(GhzCertError):
    """Party count outside the supported range."""


class NonHermitian(GhzCertError):
    """Matrix failed a Hermiticity check."""


class DimensionMismatch(GhzCertError):
    """Operands have incompatible shapes or party counts."""


class TooLarge(GhzCertError):
    """Problem size exceeds the configured desk-scale limits."""


class BadSelector(GhzCertError):
    """Setting selector is malformed for the requested operation."""


class BadIndex(GhzCertError):
    """Party or setting index out of range."""


class BadRange(GhzCertError):
    """Scalar argument outside its mathematical domain."""


class OutOfRange(GhzCertError):
    """Bell value outside the interval where a formula is defined."""


class Unsupported(GhzCertError):
    """Operation defined only for a specific configuration."""


class BadBlocks(GhzCertError):
    """Block weights do not form a probability distribution."""


class NoSignallingViolation(GhzCertError):
    """Behavior marginals depend on remote settings beyond tolerance."""


class InfeasibleValue(GhzCertError):
    """Requested Bell value exceeds the relaxation's own upper bound."""


class Infeasible(GhzCertError):
    """Solver determined the constraint set is (numerically) empty."""


class MaxIterations(GhzCertError):
    """Solver hit its iteration cap before reaching tolerance.

    Carries the best iterate's solution object in ``.solution``.
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class NoViolation(GhzCertError):
    """Observed Bell value does not certify randomness."""


class OutputTooShort(GhzCertError):
    """Certified entropy leaves no room for extractor output."""


class InsufficientData(GhzCertError):
    """A correlator has too few samples for estimation."""


class CrossCheckFailure(GhzCertError):
    """Two independent computation routes disagree beyond tolerance."""
