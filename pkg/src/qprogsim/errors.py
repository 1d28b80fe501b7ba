"""Exception types raised across the package.

All of them derive from ``ValueError`` so callers that only care about bad
input can catch that.
"""


class QProgSimError(ValueError):
    pass


class NonFiniteInput(QProgSimError):
    pass


class NotSquare(QProgSimError):
    pass


class NotPSD(QProgSimError):
    pass


class DimensionMismatch(QProgSimError):
    pass


class TooLarge(QProgSimError):
    pass


class ProbabilityOutOfRange(QProgSimError):
    pass


class InvalidRate(QProgSimError):
    pass


class InvalidInput(QProgSimError):
    pass


class InvalidRange(QProgSimError):
    pass


class LengthMismatch(QProgSimError):
    pass
