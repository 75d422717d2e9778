"""Exception hierarchy shared across the package.

Two broad families matter to callers: :class:`ValidationError` for malformed
inputs or contract violations, and :class:`NumericalError` for computations
that cannot produce a trustworthy result.  The command line maps them to exit
codes 2 and 3 respectively.
"""


class SharpFidError(Exception):
    """Base class for all package-specific failures."""


class ValidationError(SharpFidError, ValueError):
    """Invalid argument, malformed input, or broken caller contract."""


class NumericalError(SharpFidError, RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class IndeterminateEvidence(NumericalError):
    """Both predictive evidences vanish, leaving the post-data probability 0/0."""


class SupportOverlap(ValidationError):
    """Mixture components claim overlapping regions of positive measure."""


class ZeroMass(NumericalError):
    """A conditioning region carries no usable probability mass."""


class ZeroRegionMass(ZeroMass):
    """Truncation region mass underflowed; no draw can be produced."""


class NonConvergence(NumericalError):
    """An iterative routine exhausted its budget before reaching tolerance."""


class BadBracket(ValidationError):
    """Root bracketing endpoints do not enclose a sign change."""


class NoRoot(NumericalError):
    """No admissible root exists in the searched range.

    Attributes
    ----------
    gap_at_zero, gap_at_max : float
        Values of the objective at the bracket ends, kept for diagnosis.
    """

    def __init__(self, message, gap_at_zero=float("nan"), gap_at_max=float("nan")):
        super().__init__(message)
        self.gap_at_zero = gap_at_zero
        self.gap_at_max = gap_at_max


class EmptySample(ValidationError):
    """A weighted sample is empty or its weights sum to zero."""


class InsufficientSlicePopulation(ValidationError):
    """A diagnostic slice holds too few draws for a stable comparison."""


class DegenerateChains(ValidationError):
    """Chains are bitwise identical, so a dispersion diagnostic is meaningless."""
