"""Exception classes shared across the package.

The CLI maps ``ComputationRefused`` and its subclasses to exit code 1.
"""


class ComputationRefused(Exception):
    """A computation was declined because its preconditions do not hold."""


class DomainError(ComputationRefused, ValueError):
    """An argument lies outside the domain of the operation."""


class InsufficientExpansion(ComputationRefused):
    """The continued fraction terminated before reaching the requested continuant."""


class PrecisionError(ComputationRefused):
    """Working precision cannot decide a floor/ceiling boundary."""


class PrefixTooShort(ComputationRefused):
    """A word prefix is too short to certify the requested factor statistic."""


class SingularEvaluation(ComputationRefused, ZeroDivisionError):
    """A ratio of linear forms was evaluated where its denominator vanishes."""


class EmptyCondition(ComputationRefused):
    """A conditioning event has probability (or sample count) zero."""


class ConsistencyError(AssertionError):
    """Two independent computations disagree beyond their certified bounds."""
