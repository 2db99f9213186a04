"""Exception hierarchy shared by every layoutlab module."""


class LayoutLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(LayoutLabError, ValueError):
    pass


class MazeFormatError(LayoutLabError):
    """A maze or trace stream could not be parsed."""


class TraceFormatError(MazeFormatError):
    pass


class MazeValidationError(LayoutLabError):
    """A parsed maze is internally inconsistent or not perfect."""


class NoPathError(LayoutLabError):
    pass


class InternalStateError(LayoutLabError):
    pass


class ExecutorError(LayoutLabError):
    """A worker of the multi-threaded executor failed."""


class UnavailableError(LayoutLabError):
    pass


class ConfigError(LayoutLabError):
    pass


class RunFailure(LayoutLabError):
    def __init__(self, cell, cause):
        super().__init__(f"cell {cell} failed: {cause}")
        self.cell = cell
        self.cause = cause
