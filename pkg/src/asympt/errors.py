"""Exception hierarchy shared by every module.

The CLI maps any :class:`AsymptError` to exit code 1 and prints the message
verbatim, so messages should be self-contained.
"""


class AsymptError(Exception):
    """Base class for computational failures."""


class DomainError(AsymptError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateScaleError(DomainError):
    pass


class InvalidIntervalError(DomainError):
    pass


class ZeroPolynomialError(DomainError):
    pass


class SingularSystemError(AsymptError):
    pass


class NotSmoothError(AsymptError):
    """A classical derivative was requested where the function has jumps.

    ``jumps`` lists ``(x, derivative_order, jump)`` triples so that callers
    can route the computation through the distributional calculus instead.
    """

    def __init__(self, message, jumps=()):
        super().__init__(message)
        self.jumps = tuple(jumps)


class TruncationError(AsymptError):
    """Division by a number that is zero up to its truncation order."""


class NotOrderedError(AsymptError):
    pass


class UnsupportedDegreeError(AsymptError):
    pass


class SearchExhaustedError(AsymptError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InsufficientSmoothnessError(AsymptError):
    pass


class DistributionSyntaxError(AsymptError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownAtomError(DistributionSyntaxError):
    pass


class BoundaryFlagError(AsymptError):
    """A singular atom sits too close to the boundary of the domain."""


class SupportError(AsymptError):
    pass


class LadderError(AsymptError):
    pass


class IllPosedFitError(AsymptError):
    def __init__(self, message, suggested_grid=None):
        super().__init__(message)
        self.suggested_grid = suggested_grid


class NoValidExpansionError(AsymptError):
    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit


class InsufficientDataError(AsymptError):
    pass
