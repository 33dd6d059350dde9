"""Exception hierarchy shared by all modules."""


class ForsterError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ForsterError, ValueError):
    """Argument outside the physical domain of an operation."""


class ContractError(ForsterError, ValueError):
    """Input violates an operation's precondition (e.g. unnormalized state)."""


class ResonanceNotFoundError(ForsterError):
    pass


class SingularityError(ForsterError, ZeroDivisionError):
    pass


class RegimeError(ForsterError, ValueError):
    pass


class DataError(ForsterError, ValueError):
    """Malformed data series or a model that produced non-finite values."""


class NoOscillationError(DataError):
    pass


class ConfigError(ForsterError, ValueError):
    """Configuration failed to parse or validate.

    ``line`` is the 1-based line number in the source text when known.
    """

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
