"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`FixEventError`.  The CLI maps the three families onto exit codes:
data problems (3), numerical failures (4); usage errors are argparse's (2).
"""


class FixEventError(Exception):
    """Base class for all package errors."""

    kind = "error"


class DomainError(FixEventError, ValueError):
    """An argument lies outside the domain an operation is defined on."""

    kind = "domain"


class DimensionError(DomainError):
    """Empty or overflowing dimensions (matrix sizes, vector placement)."""

    kind = "dimension"


class InvalidParameterError(DomainError):
    """Model parameters imply an invalid distribution (e.g. sigma <= 0)."""

    kind = "invalid_parameter"


class MissingCoefficientError(FixEventError, KeyError):
    """A quantile level was requested that the model was not fitted for."""

    kind = "missing_coefficient"

    def __str__(self):  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class DataError(FixEventError):
    """Malformed, inconsistent or missing input data."""

    kind = "data"


class JoinError(DataError):
    """Predictions and outcomes could not be aligned by case id."""

    kind = "join"


class CoverageGapError(DataError):
    """Some cases have no out-of-sample prediction."""

    kind = "coverage_gap"


class NumericalError(FixEventError):
    """Base class for numerical failures."""

    kind = "numerical"


class OptimizationError(NumericalError):
    """The objective was non-finite at every start point."""

    kind = "optimization"


class DegenerateDataError(NumericalError):
    """The sample carries no information about a scale parameter."""

    kind = "degenerate_data"


class DegenerateVarianceError(NumericalError):
    """A test statistic has a zero variance estimate."""

    kind = "degenerate_variance"


class FoldError(NumericalError):
    """A cross-validation fold could not be fitted."""

    kind = "fold"

    def __init__(self, year, cause, replication=None):
        self.year = year
        self.cause = cause
        self.replication = replication
        where = f"year {year}"
        if replication is not None:
            where = f"replication {replication}, {where}"
        super().__init__(f"fold failure ({where}): {cause}")
