"""Exception hierarchy shared by every module."""


class LogTauberError(Exception):
    """Base class for all package errors."""


class DSLSyntaxError(LogTauberError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class DomainError(LogTauberError):
    """An expression was evaluated outside the domain of one of its functions."""


class IntervalError(LogTauberError):
    """Piece intervals overlap, leave a gap, or do not cover [1, inf)."""


class HorizonError(LogTauberError):
    """A query reached past the horizon up to which a function is available."""


class ToleranceError(LogTauberError):
    """Adaptive quadrature hit its subdivision limit before meeting tolerance."""


class HypothesisError(LogTauberError):
    """A lemma or construction was invoked without its hypotheses holding."""
