"""Bilinear forms of time-ordered matrix exponentials on a time grid.

The package discretizes the convolution algebra of causal two-time kernels
(product = triangular matrix product times the step size), tridiagonalizes a
kernel matrix with a biorthogonal three-term recurrence, and evaluates the
resulting reduced model through a finite continued fraction. Independent
references (Runge-Kutta propagation, brute-force moments, dense block
resolvents) live in :mod:`todex.oracle`.
"""

from .errors import (
    BreakdownSingularError,
    DepthError,
    DimensionMismatchError,
    EvaluationError,
    GridMismatchError,
    IndexRangeError,
    InvalidIntervalError,
    InvalidSizeError,
    NormalizationError,
    ProblemFormatError,
    TodexError,
    UnsupportedOrderError,
)
from .grid import GridOperator, TimeGrid, delta_operator, make_grid, sample_smooth, theta_operator, zero_operator
from .lanczos import TridiagonalResult, check_biorthogonality, star_lanczos, tridiagonal_matrix
from .matrices import StarMatrix, assemble, bilinear_moment, identity_star_matrix, star_matmul
from .oracle import brute_moment, example_library, random_problem, resolvent_direct, rk4_propagator, rk4_series
from .pathsum import approx_series, approx_u, error_bound, pathsum_resolvent_11
from .problems import ProblemSpec, load_problem, save_problem
from .star import integrate_from, star_inverse, star_power, star_product, star_resolvent, star_right_divide

__version__ = "0.1.0"

__all__ = [
    "TimeGrid",
    "GridOperator",
    "StarMatrix",
    "TridiagonalResult",
    "ProblemSpec",
    "make_grid",
    "theta_operator",
    "delta_operator",
    "sample_smooth",
    "zero_operator",
    "star_product",
    "star_inverse",
    "star_power",
    "star_resolvent",
    "star_right_divide",
    "integrate_from",
    "assemble",
    "star_matmul",
    "bilinear_moment",
    "identity_star_matrix",
    "star_lanczos",
    "tridiagonal_matrix",
    "check_biorthogonality",
    "pathsum_resolvent_11",
    "approx_u",
    "approx_series",
    "error_bound",
    "rk4_propagator",
    "rk4_series",
    "brute_moment",
    "resolvent_direct",
    "example_library",
    "random_problem",
    "load_problem",
    "save_problem",
    "TodexError",
    "BreakdownSingularError",
    "NormalizationError",
    "DepthError",
    "GridMismatchError",
    "DimensionMismatchError",
    "InvalidIntervalError",
    "InvalidSizeError",
    "UnsupportedOrderError",
    "IndexRangeError",
    "EvaluationError",
    "ProblemFormatError",
]
