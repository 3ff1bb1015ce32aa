"""Exception types shared across the toolkit."""


class RisDoaError(Exception):
    """Base class for all toolkit errors."""


class CoincidentNodes(RisDoaError):
    """Two scene nodes occupy the same position."""


class AngleOutOfRange(RisDoaError):
    """An angle fell outside the (-90 deg, 90 deg) front half-plane."""


class DimensionMismatch(RisDoaError):
    """Array shapes are inconsistent with each other."""


class InvalidSubarray(RisDoaError):
    """Hankel sub-array length violates the rank conditions."""


class RankDeficient(RisDoaError):
    """Not enough singular triplets to form the requested subspace."""


class NotConverged(RisDoaError):
    """Iterative solver hit the iteration cap before meeting tolerances.

    Carries the best iterate so callers can still inspect diagnostics.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SingularModel(RisDoaError):
    """Fisher-information inputs have inconsistent dimensions."""


class SingularFIM(RisDoaError):
    """Fisher information matrix is numerically singular."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class ZeroGradient(RisDoaError):
    """Steering-vector gradient vanishes (endfire degeneracy)."""


class ZeroVector(RisDoaError):
    """An operation received an all-zero vector where it is undefined."""


class CountMismatch(RisDoaError):
    """Estimate and truth lists have different lengths."""


class DictionaryDegenerate(RisDoaError):
    """Selected dictionary atoms became numerically dependent."""
