"""Exception hierarchy.

Input problems derive from ``ValueError`` and numerical breakdowns from
``ArithmeticError`` so callers (and the CLI exit-code mapping) can tell them
apart without enumerating every class.
"""


class ScanoptError(Exception):
    pass


class InputError(ScanoptError, ValueError):
    pass


class NumericalError(ScanoptError, ArithmeticError):
    pass


class DimensionMismatch(InputError):
    pass


class NotStochastic(InputError):
    pass


class NotPositiveDefinite(InputError):
    pass


class ParameterOutOfRange(InputError):
    pass


class InvalidPmf(InputError):
    pass


class InvalidSelectionProbabilities(InputError):
    pass


class UnsupportedCombination(InputError):
    pass


class TraceTooShort(InputError):
    pass


class GridTooLarge(InputError):
    pass


class ConfigError(InputError):
    pass


class SingularMatrix(NumericalError):
    pass


class NoConvergence(NumericalError):
    """QR iteration hit its cap; ``spectrum`` holds the partial result."""

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class TruncationNotConverged(NumericalError):
    """Autocovariance series hit ``max_lag``; ``partial`` is the sum so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
