class InfolagError(Exception):
    """Base class for errors raised by this package."""


class ParseError(InfolagError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInputError(InfolagError, ValueError):
    pass


class InsufficientDataError(InfolagError, ValueError):
    pass


class NumericalError(InfolagError, ArithmeticError):
    pass
