"""Exception types shared across the package."""


class PdkdeError(Exception):
    """Base class for all package errors."""


class InvalidArgument(PdkdeError, ValueError):
    """An argument violates an operation's preconditions."""


class NumericError(PdkdeError, ArithmeticError):
    """A numerical routine failed (quadrature, rejection sampling)."""


class ParseError(PdkdeError, ValueError):
    """A data file could not be parsed.

    ``line`` is 1-based, or ``None`` when the error is not tied to a line.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
