"""Exception types shared across the package."""


class SplitgrowError(Exception):
    """Base class for all splitgrow errors."""


class InvalidParameterError(SplitgrowError, ValueError):
    """A constructor argument is outside its admissible range."""


class UnknownTailError(SplitgrowError):
    """An unbounded model carries no usable information about the behaviour
    of i * w[1, i+1] for large i, so the infimum cannot be determined."""


class RegimeError(SplitgrowError):
    """The model is outside the regime for which the density iteration is
    guaranteed to converge to the census limit."""


class NoConvergenceError(SplitgrowError):
    """Iteration hit the step budget before reaching the tolerance."""


class RankDeficientError(SplitgrowError):
    """The stationary system has rank below d_max - 1; the bounded-degree
    solve cannot single out a density vector."""


class NonPositiveError(SplitgrowError):
    """A solved density came out significantly negative."""


class DegeneracyError(SplitgrowError):
    """Total sampling weight is not positive; no growth step can be taken."""


class InvalidDegreeError(SplitgrowError):
    """No admissible split exists for the requested degree."""


class ReductionInvalidError(SplitgrowError):
    """The two-colour to one-colour reduction produced an invalid model."""
