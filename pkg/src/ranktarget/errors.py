"""Exception and warning types shared across the package."""


class RankTargetError(Exception):
    """Base class for all errors raised by this package."""


# --- data ingestion / validation ---

class MissingColumn(RankTargetError):
    pass


class NonNumericCovariate(RankTargetError):
    pass


class DuplicateHouseholdId(RankTargetError):
    pass


class NotAPermutation(RankTargetError):
    pass


class UnknownHousehold(RankTargetError):
    pass


class CommunityMismatch(RankTargetError):
    pass


class ZeroVarianceColumn(RankTargetError):
    pass


# --- random sampling ---

class EmptyInterval(RankTargetError):
    pass


class InvalidParam(RankTargetError):
    pass


class NotPositiveDefinite(RankTargetError):
    pass


class InvalidProbabilities(RankTargetError):
    pass


# --- model fitting ---

class DivergentChain(RankTargetError):
    pass


class AllSameOutcome(RankTargetError):
    pass


class RankDeficient(RankTargetError):
    pass


class InsufficientSamples(RankTargetError):
    pass


# --- evaluation ---

class InvalidQuota(RankTargetError):
    pass


class DimensionMismatch(RankTargetError):
    pass


class SetMismatch(RankTargetError):
    pass


class UnknownCommunity(RankTargetError):
    pass


class NotEnoughCommunities(RankTargetError):
    pass


class AllZero(RankTargetError):
    pass


class InvalidConfig(RankTargetError):
    pass


# --- warnings (recoverable conditions, computation proceeds) ---

class RankTieWarning(UserWarning):
    """Exact ties in a latent vector; broken by index order."""


class QuotaMismatchWarning(UserWarning):
    """Selected-set size differs from truth-set size; rate still computed."""
