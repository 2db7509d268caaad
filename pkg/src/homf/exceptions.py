"""Exception and warning types shared across the package."""


class HomfError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateSubset(HomfError):
    """A sampled or supplied subset cannot determine a model (duplicates,
    collinear configurations, zero-area geometry). Callers should resample."""


class KindMismatch(HomfError):
    """Data layout does not match the model family (points vs correspondences)."""


class ZeroSpread(HomfError):
    """Residual spread is zero; the hypothesis is degenerate for density weighting."""


class AllEqualWeights(HomfError):
    """Every weighting score is identical; the hypothesis carries no information."""


class TooFewSignificant(HomfError):
    """Fewer significant points than the order statistic requires."""


class OutOfDomain(HomfError):
    """Argument outside the mathematical domain of the function."""


class SubsetTooLarge(HomfError):
    """Requested subset size exceeds the number of available points."""


class NoConvergence(HomfError):
    """An iterative numerical routine failed to converge."""


class InsufficientData(HomfError):
    """Not enough observations to run the requested fit."""


class TooManyDegenerateDraws(HomfError):
    """Resampling budget exhausted without finding a non-degenerate subset."""


class InvalidSpec(HomfError):
    """Synthetic-data specification violates its own invariants."""


class NonPositiveScale(HomfError):
    """Scale comparison requires strictly positive scales."""


class LengthMismatch(HomfError):
    """Two label vectors that must align have different lengths."""


class SingularKernelWarning(UserWarning):
    """Requested cluster count exceeds the numerical rank of the kernel plus one;
    labels are best-effort."""


class ScaleNonConvergenceWarning(UserWarning):
    """Iterative scale estimation hit its iteration cap; last iterate returned."""
