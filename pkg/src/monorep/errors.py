"""Exception hierarchy shared by every module of the package."""


class MonorepError(Exception):
    """Base class for all errors raised by :mod:`monorep`."""


class DimensionError(MonorepError, ValueError):
    """Vectors, grids or operators with incompatible dimensions."""


class ProperError(MonorepError, ValueError):
    """A function that is +inf everywhere (or takes the value -inf / nan)."""


class GridFormatError(MonorepError, ValueError):
    """Malformed grid-function text file."""


class SpecError(MonorepError, ValueError):
    """Malformed JSON operator/representative specification.

    The message always names the offending field.
    """


class UnsupportedError(MonorepError, ValueError):
    """Operation not available for the given inputs (e.g. non-Euclidean oracle)."""


class MonotonicityError(MonorepError, ValueError):
    """Precondition on monotonicity violated, e.g. A + A^T not positive semidefinite."""


class InfeasibleStartError(MonorepError, RuntimeError):
    """Every initialization candidate of the resolvent solver has infinite value."""


class NonMonotoneExtractionError(MonorepError, RuntimeError):
    """The extracted zero set of ``h - <x, v>`` is not monotone.

    Attributes:
        pair: indices ``(i, j)`` of two extracted points violating monotonicity.
    """

    def __init__(self, message, pair):
        super().__init__(message)
        self.pair = pair
