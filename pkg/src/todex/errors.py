"""Exception types shared across the package.

Every exception carries a short machine-readable ``code`` so batch tools can
emit structured error objects without string matching.
"""


class TodexError(Exception):
    """Base class for all package errors."""

    code = "error"


class InvalidIntervalError(TodexError, ValueError):
    code = "invalid-interval"


class InvalidSizeError(TodexError, ValueError):
    code = "invalid-size"


class UnsupportedOrderError(TodexError, ValueError):
    code = "unsupported-order"


class GridMismatchError(TodexError, ValueError):
    code = "grid-mismatch"


class DimensionMismatchError(TodexError, ValueError):
    code = "dimension-mismatch"


class IndexRangeError(TodexError, IndexError):
    code = "index-out-of-range"


class BreakdownSingularError(TodexError, ArithmeticError):
    """A triangular system has no usable inverse in the algebra."""

    code = "breakdown-singular"


class NormalizationError(TodexError, ValueError):
    code = "normalization-violation"


class DepthError(TodexError, ValueError):
    code = "depth-exceeds-dimension"


class ExprSyntaxError(TodexError, ValueError):
    """Malformed expression source; ``position`` is a 0-based offset."""

    code = "syntax-error"

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(ExprSyntaxError):
    code = "unknown-identifier"


class ArityError(ExprSyntaxError):
    code = "arity-error"


class EvaluationError(TodexError, ValueError):
    code = "evaluation-error"


class ProblemFormatError(TodexError, ValueError):
    code = "problem-format"
