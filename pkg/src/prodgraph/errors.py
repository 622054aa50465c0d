"""Exception types shared across the package."""


class ProdGraphError(Exception):
    """Base class for all errors raised by prodgraph."""


class InvalidParameterError(ProdGraphError, ValueError):
    """A scalar parameter (budget, k, n, ...) is out of its admissible range."""


class InvalidInputError(ProdGraphError, ValueError):
    """An array or data argument has the wrong shape, values or structure."""


class SingularSystemError(ProdGraphError, ArithmeticError):
    """A sampled factor basis is rank deficient, so the estimate is not unique."""

    def __init__(self, message, factor=None):
        super().__init__(message)
        self.factor = factor


class SearchSpaceError(ProdGraphError):
    """Exhaustive search refused because the search space is too large."""


class UndefinedMetricError(ProdGraphError, ValueError):
    """An error metric is undefined for the given input (empty mask, zero norm)."""


class ParseError(ProdGraphError, ValueError):
    """A data file could not be parsed. Carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
        if line is not None:
            loc = f"{loc}:{line}" if loc else f"line {line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line
