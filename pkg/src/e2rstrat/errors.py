"""Exception hierarchy shared across the package."""


class E2RError(Exception):
    """Base class for all package errors."""


class InputError(E2RError, ValueError):
    """Bad user input (files, labels, arguments)."""


class UnknownCode(InputError, KeyError):
    def __str__(self):
        # KeyError quotes its argument; keep messages readable
        return str(self.args[0]) if self.args else ""


class ParseError(InputError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateId(InputError):
    pass


class EmptyCorpus(InputError):
    pass


class EmptyInput(InputError):
    pass


class InvalidK(InputError):
    pass


class LengthMismatch(InputError):
    pass


class InvalidConfig(InputError):
    pass


class DimensionMismatch(E2RError, ValueError):
    pass


class NumericalError(E2RError, ArithmeticError):
    pass
