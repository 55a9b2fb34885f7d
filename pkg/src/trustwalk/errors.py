"""Exception hierarchy shared by the package."""


class TrustWalkError(Exception):
    """Base class for all package errors."""


class DataError(TrustWalkError):
    """Problem with input data; carries an optional source line number."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ParseError(DataError):
    pass


class ValidationError(DataError):
    pass


class DomainError(TrustWalkError, ValueError):
    """Argument outside the domain of an operation."""


class UnknownEntityError(TrustWalkError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown entity"


class SinkError(TrustWalkError):
    """Node has no out-edge with positive step score."""
