"""Exception hierarchy."""


class TescError(Exception):
    """Base class for all library errors."""


class ParseError(TescError):
    """Malformed input file (carries a 1-based line number when known)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateTieError(TescError):
    """A density vector is one single tie: the null variance is zero and the
    test statistic is undefined."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class SimulationError(TescError):
    """Event-pair generation is infeasible on the given graph."""
