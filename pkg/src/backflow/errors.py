"""Exception hierarchy shared by every module."""


class BackflowError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(BackflowError, ValueError):
    pass


class NumericalError(BackflowError):
    """A computation could not meet its accuracy contract."""


class DegenerateStateError(NumericalError):
    pass


class TruncationError(NumericalError):
    """Support of a field leaves the grid it is represented on."""

    def __init__(self, message, lost_mass=None):
        super().__init__(message)
        self.lost_mass = lost_mass


class ResolutionError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class ExtrapolationError(NumericalError):
    def __init__(self, message, raw=()):
        super().__init__(message)
        self.raw = list(raw)


class ConfigError(BackflowError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
        self.line = line
        self.column = column
