"""Exception hierarchy shared by every qkmm module."""


class QkmmError(Exception):
    """Base class for all library errors."""


class ValidationError(QkmmError, ValueError):
    """Input data violates a documented precondition (norms, shapes, ranges)."""


class ConfigurationError(QkmmError, ValueError):
    """A circuit, register layout or run configuration is inconsistent."""


class QubitIndexError(QkmmError, IndexError):
    """Qubit indices are out of range or repeated."""


class DecompositionError(QkmmError):
    """A gate has no registered decomposition rule in strict mode."""


class NumericError(QkmmError, ArithmeticError):
    """Non-finite values or probabilities outside the clamping tolerance."""
