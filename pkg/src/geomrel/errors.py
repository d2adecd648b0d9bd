"""Exception types shared across the package."""

__all__ = ["DataFormatError", "FitError", "PredictionError"]


class DataFormatError(ValueError):
    """Raised when an input stream does not match its declared format.

    ``line`` is the 1-based line number of the offending row when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FitError(RuntimeError):
    """Raised when a model cannot be fitted to a dataset at all.

    Non-convergence is not a FitError; fitters report it through their
    result objects so callers can decide what to do with a poor fit.
    """


class PredictionError(RuntimeError):
    """Raised when a fitted model refuses to produce a prediction."""
