"""Error types raised across the package.

Split into validation errors (bad inputs or malformed data, CLI exit 1)
and environment errors (I/O trouble, CLI exit 2).
"""


class LungCoverError(Exception):
    """Base class for all package errors."""


class ValidationError(LungCoverError):
    """Inputs violate a documented precondition or type invariant."""


class MalformedHeader(ValidationError):
    """Volume/mask header JSON is missing fields or holds bad values."""


class SizeMismatch(ValidationError):
    """Raw payload length disagrees with the header dims/dtype."""


class MalformedMask(ValidationError):
    """Mask payload contains bytes other than 0 and 1."""


class GeometryMismatch(ValidationError):
    """Two operands do not share the required dims/spacing."""


class BothEmpty(ValidationError):
    """Overlap metric undefined: both masks are empty."""


class EmptyReference(ValidationError):
    """Fraction undefined: the reference mask is empty."""


class EmptyInput(ValidationError):
    """Statistic undefined on an empty sample."""


class LengthMismatch(ValidationError):
    """Paired samples differ in length."""


class TooFewSamples(ValidationError):
    """Sample smaller than the method's documented minimum."""


class TooManySamples(ValidationError):
    """Sample larger than the method's documented maximum."""


class DegenerateVariance(ValidationError):
    """Statistic undefined: sample has zero variance."""


class AllZeroDifferences(ValidationError):
    """Signed-rank test undefined: every paired difference is zero."""


class SpecViolation(ValidationError):
    """Phantom spec breaks a geometric invariant (lung outside grid, ...)."""


class IoFailure(LungCoverError):
    """Underlying filesystem operation failed."""
