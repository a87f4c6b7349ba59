"""Exception types shared across the package.

Every error raised by library code derives from :class:`MpsentError` so
callers (and the command-line runner) can catch one base class and still
discriminate on the concrete type.
"""


class MpsentError(Exception):
    """Base class for all package-specific errors."""


# --- model solving ----------------------------------------------------------

class Indeterminate(MpsentError):
    """The interest-rate rule is too weak for a unique stable solution."""


class NoStableRoot(MpsentError):
    """The rate-persistence fixed point has no root inside (0, 1)."""


class SingularSystem(MpsentError):
    """The stacked perfect-foresight system is rank deficient."""


# --- VAR estimation and identification --------------------------------------

class InsufficientData(MpsentError):
    """Too few usable observations for the requested estimation."""


class SingularRegressors(MpsentError):
    """Regressor matrix is rank deficient."""


class StabilityExhausted(MpsentError):
    """Posterior sampling hit the resampling cap without enough stable draws."""


class EmptyIdentifiedSet(MpsentError):
    """No rotation satisfied all three sign patterns."""


class AllZeroWeights(MpsentError):
    """Weighted summaries need at least one strictly positive weight."""


# --- regression and GMM ------------------------------------------------------

class RankDeficient(MpsentError):
    """Design or instrument matrix does not have full column rank."""


class WeightingSingular(MpsentError):
    """The GMM weighting matrix (HAC moment covariance) is not invertible."""


# --- text metrics -------------------------------------------------------------

class DegenerateData(MpsentError):
    """Agreement is undefined because only one distinct label appears."""


class EmptyPeriod(MpsentError):
    """A period contains no tokens or no labeled sentences."""


class EmptyBaseWindow(MpsentError):
    """The normalization window does not overlap the series."""


# --- synthetic data ------------------------------------------------------------

class UnstableDgp(MpsentError):
    """The requested generating process is explosive."""


class ExplosivePath(MpsentError):
    """A simulated path diverged beyond the plausibility bound."""


# --- frame ingestion ------------------------------------------------------------

class ParseError(MpsentError):
    """A cell or row of an input file could not be parsed."""


class DuplicateDate(MpsentError):
    """Two rows of an input frame carry the same date."""


class NonNumericCell(MpsentError):
    """A data cell is neither numeric nor an allowed missing marker."""


class ZeroVariance(MpsentError):
    """A column selected for standardization is constant."""
