"""Semantic exceptions shared across the package."""


class DataError(ValueError):
    """Input data violates a hard requirement (NaN values, nonpositive prices, ...)."""


class SpecError(ValueError):
    """A process specification is malformed (bad transition matrix, unknown generator, ...)."""


class DomainError(ValueError):
    """A quantity is requested outside its mathematical domain (non-summable
    mixing series, density zero at the target quantile, unattainable CDF level)."""


class TiesError(ValueError):
    """An operation requiring pairwise-distinct sample values saw ties."""


class FitError(ValueError):
    """A rate fit cannot be performed on the given table."""


class StatisticsError(ValueError):
    """A Monte-Carlo estimate was requested with statistically meaningless settings."""
