"""Exception hierarchy shared by every analysis module."""


class GridFreqError(Exception):
    """Base class for all errors raised by gridfreq."""


class InputEmpty(GridFreqError):
    pass


class MalformedInput(GridFreqError):
    def __init__(self, message, row_errors=()):
        super().__init__(message)
        self.row_errors = list(row_errors)


class InternalOrderingError(GridFreqError):
    pass


class LagNotAligned(GridFreqError):
    pass


class LagExceedsSeries(GridFreqError):
    pass


class TooFewSamples(GridFreqError):
    pass


class DegenerateDistribution(GridFreqError):
    pass


class FitDiverged(GridFreqError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InsufficientScales(GridFreqError):
    pass


class UnstableDiscretization(GridFreqError):
    pass


class ReportEmpty(GridFreqError):
    pass


class DuplicateLabel(GridFreqError):
    pass
