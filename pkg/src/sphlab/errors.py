"""Exception hierarchy shared by all sphlab modules."""


class SphlabError(Exception):
    """Base class for every error raised by sphlab."""


class NonUnimodular(SphlabError):
    """A matrix that should lie in SL_n has determinant different from 1."""


class InvalidCoweight(SphlabError):
    """A coweight is not dominant, has the wrong length or a nonzero sum."""


class BadCoweightSum(InvalidCoweight):
    pass


class ResourceLimit(SphlabError):
    """A configured enumeration cap would be exceeded."""


class ContextMismatch(SphlabError):
    """Operands live over different (p, n)."""


class RankTooSmall(SphlabError):
    pass


class InexactCoefficient(SphlabError):
    pass


class NonHermitian(SphlabError):
    """Gram matrix fails the Hermitian test at the requested tolerance."""


class DimensionMismatch(SphlabError):
    pass


class NotFound(SphlabError):
    """A bounded search exhausted its budget.

    ``report`` carries whatever diagnostic profile the search collected, so
    callers can decide how to enlarge the next attempt.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report if report is not None else {}
