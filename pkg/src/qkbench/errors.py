"""Exception hierarchy shared by every qkbench module."""


class QkbenchError(Exception):
    """Base class for all errors raised by qkbench."""


class ConfigurationError(QkbenchError, ValueError):
    """A parameter or config value is out of its allowed range."""


class ContractError(QkbenchError, ValueError):
    """Inputs violate an operation's preconditions (shapes, symmetry, labels)."""


class SingularEncodingError(QkbenchError, ArithmeticError):
    """An encoding function hit a vanishing denominator."""


class EncodingRangeError(QkbenchError, OverflowError):
    """An encoding angle would overflow double precision."""


class ResourceError(QkbenchError, MemoryError):
    """A computation would exceed the configured memory budget."""


class ConvergenceError(QkbenchError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""


class DomainError(QkbenchError, ValueError):
    """Input values lie outside a transform's mathematical domain."""


class NumericError(QkbenchError, ArithmeticError):
    """A linear-algebra step failed (singular matrix after regularization)."""


class DataError(QkbenchError, ValueError):
    """The dataset cannot support the requested split or fit."""


class FormatError(QkbenchError, ValueError):
    """An input file is malformed."""
