"""Exception hierarchy shared by every fairrank module."""


class FairRankError(Exception):
    """Base class; the CLI maps subclasses to a one-line reason."""

    kind = "error"


class ConfigurationError(FairRankError, ValueError):
    kind = "configuration"


class UndefinedStatisticError(FairRankError, ValueError):
    """A statistic needs observations from a cell that is empty."""

    kind = "undefined-statistic"


class DomainError(FairRankError, ValueError):
    kind = "domain"


class ShapeError(FairRankError, ValueError):
    kind = "shape"


class DegenerateRateError(FairRankError, ValueError):
    kind = "degenerate-rate"


class SchemaError(FairRankError, ValueError):
    kind = "schema"


class NonFiniteError(FairRankError, FloatingPointError):
    """Raised when a loss or gradient stops being finite during training."""

    kind = "non-finite"

    def __init__(self, message, iteration=None, terms=None):
        super().__init__(message)
        self.iteration = iteration
        self.terms = dict(terms or {})
