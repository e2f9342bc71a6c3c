"""Continued-fraction evaluation of the reduced model and its error bound.

The (1,1) entry of the resolvent of a tridiagonal kernel matrix with unit
impulses on the superdiagonal is a finite continued fraction: starting from
the last diagonal kernel, r = (id - alpha_{n-1})^{-1}, then repeatedly
r = (id - alpha_k - r * beta_{k+1})^{-1}. Integrating that entry from the
interval start yields the depth-n approximation to w^H U(t', t_start) v,
where U solves dU/dt' = A(t') U with U = Id at t' = t_start.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BreakdownSingularError
from .grid import GridOperator, delta_operator
from .lanczos import SERIOUS, TridiagonalResult, star_lanczos
from .matrices import StarMatrix
from .star import integrate_from, star_inverse, star_product

__all__ = ["pathsum_resolvent_11", "approx_u", "approx_series", "error_bound", "bound_constants"]


def pathsum_resolvent_11(result: TridiagonalResult) -> GridOperator:
    """Evaluate the nested fraction bottom-up and return its top level.

    Accepts completed and lucky-breakdown results (after a lucky breakdown the
    reduced model is exact, so the fraction is still meaningful). Each level
    inverts an impulse-dominated kernel, so the inner systems are regular;
    a breakdown can only surface through a degenerate coefficient kernel.
    """
    if result.status == SERIOUS:
        raise BreakdownSingularError(
            f"tridiagonalization hit a serious breakdown at step {result.breakdown_step}"
        )
    if result.n < 1:
        raise ValueError("need at least one diagonal kernel")
    ident = delta_operator(result.grid, 0)
    r = star_inverse(ident - result.alphas[result.n - 1])
    for k in range(result.n - 2, -1, -1):
        r = star_inverse(ident - result.alphas[k] - star_product(r, result.betas[k]))
    return r


def approx_series(result: TridiagonalResult) -> np.ndarray:
    """Integrate the top fraction level from the interval start.

    Returns the depth-n approximant of w^H U(t', t_start) v sampled at every
    grid node.
    """
    return integrate_from(pathsum_resolvent_11(result), 0)


def approx_u(A: StarMatrix, w, v, n: int) -> np.ndarray:
    """Tridiagonalize to depth n, evaluate the fraction, and integrate."""
    return approx_series(star_lanczos(A, w, v, n))


def _coefficient_sup(result: TridiagonalResult) -> float:
    """Largest kernel magnitude among the diagonal and subdiagonal
    coefficients, boundary columns masked out."""
    grid = result.grid
    mask = np.tril(np.ones((grid.n_nodes, grid.n_nodes), dtype=bool))
    for idx in result.boundary_nodes:
        mask[idx, :] = False
        mask[:, idx] = False
    sup = 0.0
    kernels = list(result.alphas[: result.n]) + list(result.betas[: result.n - 1])
    for op in kernels:
        if op.is_zero:
            continue
        sup = max(sup, float(np.max(np.abs(op.data)[mask])))
    return sup


def bound_constants(A: StarMatrix, result: TridiagonalResult):
    """Constants of the a-priori bound: C is the largest infinity norm of the
    coefficient matrix over the grid nodes, D three times the largest
    coefficient kernel magnitude. Node estimates, so slight underestimates of
    the true suprema of smooth data."""
    # pointwise coefficient matrix values live on the operator diagonals
    diag_stack = np.array(
        [[np.diag(A[k, l].data) for l in range(A.cols)] for k in range(A.rows)]
    )
    row_sums = np.abs(diag_stack).sum(axis=1)  # (rows, nodes)
    C = float(row_sums.max())
    D = 3.0 * _coefficient_sup(result)
    return C, D


def error_bound(A: StarMatrix, result: TridiagonalResult, t_prime: float, t: float) -> float:
    """A-priori bound on |w^H U(t', t) v - depth-n approximant|.

    With C, D from :func:`bound_constants`, the bound is
    (C^{2n} + D^{2n}) / (2n)! * (t'-t)^{2n} * exp((C+D)(t'-t)).
    Returns +inf on overflow.
    """
    if t_prime < t:
        raise ValueError("t_prime must be >= t")
    grid = A.grid
    if not (grid.t_start <= t <= grid.t_end and grid.t_start <= t_prime <= grid.t_end):
        raise ValueError("t and t_prime must lie inside the grid interval")
    n = result.n
    C, D = bound_constants(A, result)
    gap = t_prime - t
    if gap == 0.0 or (C == 0.0 and D == 0.0):
        return 0.0
    log_gap = math.log(gap) if gap > 0 else -math.inf
    lg_fact = math.lgamma(2 * n + 1)
    exponent_common = 2 * n * log_gap + (C + D) * gap - lg_fact
    total = 0.0
    for base in (C, D):
        if base == 0.0:
            continue
        log_term = 2 * n * math.log(base) + exponent_common
        if log_term > 700.0:
            return math.inf
        total += math.exp(log_term)
    return total
