"""Exception hierarchy shared by all modules.

Every error carries a machine-readable ``kind`` (its class name) so the
service layer and CLI can serialize failures uniformly.
"""


class HankelCompError(Exception):
    """Base class for all library errors."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class MissingIndex(HankelCompError):
    """An operation required an entry that is not specified."""


class BadOffset(HankelCompError):
    """Subsequence/arithmetic offset must be an even nonnegative integer."""


class OrderTooLarge(HankelCompError):
    """Requested Hankel order exceeds the configured cap."""


class NonFiniteEntry(HankelCompError):
    """A matrix or sequence entry is NaN or infinite."""


class SingularBlock(HankelCompError):
    """Leading block is numerically singular; Schur complement undefined."""


class LengthMismatch(HankelCompError):
    """Sequences combined pointwise must have equal length."""


class NotPartialPD(HankelCompError):
    """Input fails the partial positive-definiteness precondition."""


class UnsupportedPattern(HankelCompError):
    """Pattern is outside the families this operation can complete."""


class NotCompletable(HankelCompError):
    """The pattern provably has no positive completion."""


class NotPositive(HankelCompError):
    """Data is not a (truncated) positive moment sequence."""


class IllConditioned(HankelCompError):
    """Factorization pivot ratio too large for reliable extraction."""


class StieltjesViolation(HankelCompError):
    """Even root map requires all atoms strictly positive."""


class NotGeometric(HankelCompError):
    """Values do not fit a geometric progression a*r^k."""


class EpsilonUnderflow(HankelCompError):
    """No positive perturbation size keeps the input partial PD."""


class NotSingleMissing(HankelCompError):
    """Operation requires exactly one missing entry of low polynomial degree."""


class TooManyMissing(HankelCompError):
    """Search-based decision supports at most a handful of missing entries."""


class Overflow(HankelCompError):
    """Synthesized moments exceed the representable floating-point range."""
