"""Biorthogonal tridiagonalization of a kernel matrix by three-term recurrences.

Given a square matrix A of causal kernels and time-independent vectors w, v
with w^H v = 1, the iteration produces scalar kernels alpha_0 .. alpha_{n-1}
and beta_1 .. beta_n together with column bases V = [v_0 .. v_{n-1}] and
W = [w_0 .. w_{n-1}] satisfying w_i^H * v_j = delta_ij * (impulse identity).
The tridiagonal matrix with the alphas on the diagonal, the betas below and
the impulse identity above then reproduces the first 2n moments
w^H (A^{*j}) v of the original matrix.

Termination:

* lucky breakdown -- a residual vector vanishes; the tridiagonal matrix is an
  exact model from that step on.
* serious breakdown -- some beta has no usable inverse in the algebra; the
  iteration cannot continue (no look-ahead is attempted).

Every beta produced by the discrete product rules carries an O(dt) diagonal,
so in practice its triangular system is regular and the division for the next
basis column is exact to rounding. The exception is a corner fiber where the
underlying kernel degenerates (for instance a leading entry that vanishes at
the interval start): the matching pivots are then exactly zero, the affected
columns of the new basis vector are undetermined, and they are repaired by
band extrapolation and reported as boundary columns of the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BreakdownSingularError, DepthError, DimensionMismatchError, NormalizationError
from .grid import TimeGrid, delta_operator, zero_operator
from .matrices import StarMatrix, apply_to_vector, as_vector, star_apply
from .star import DEFAULT_TOL_SINGULAR, star_product, star_right_divide

__all__ = ["TridiagonalResult", "star_lanczos", "tridiagonal_matrix", "check_biorthogonality"]

DEFAULT_TOL_LUCKY = 1e-10

COMPLETED = "completed"
LUCKY = "lucky-breakdown"
SERIOUS = "serious-breakdown"


@dataclass(frozen=True)
class TridiagonalResult:
    """Output of the tridiagonalization.

    ``alphas`` holds the n diagonal kernels, ``betas`` the subdiagonal ones
    (beta_1 .. beta_{n-1}, plus the trailing beta_n whenever the final step
    computed it). ``boundary_nodes`` lists grid indices whose kernel columns
    were repaired during a degenerate division; comparisons against exact
    identities should mask them out. ``breakdown_step`` is set for both
    breakdown statuses.
    """

    n: int
    alphas: tuple
    betas: tuple
    V: StarMatrix
    W: StarMatrix
    status: str
    breakdown_step: int | None = None
    boundary_nodes: tuple = ()
    w_in: tuple = ()
    v_in: tuple = ()

    @property
    def grid(self) -> TimeGrid:
        return self.alphas[0].grid

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED


def _max_abs(column) -> float:
    return max(op.max_abs() for op in column)


def star_lanczos(
    A: StarMatrix,
    w,
    v,
    n: int,
    tol_lucky: float = DEFAULT_TOL_LUCKY,
    tol_singular: float = DEFAULT_TOL_SINGULAR,
) -> TridiagonalResult:
    """Run the three-term biorthogonalization to depth ``n``.

    Requires w^H v = 1 (to 1e-12) and 1 <= n <= dim(A). The residual pair
    (w_n, vhat_n) and beta_n of the final step are still computed so the
    result reports whether the model became exact (lucky breakdown) exactly
    as it would at an interior step.
    """
    if A.rows != A.cols:
        raise DimensionMismatchError("tridiagonalization needs a square kernel matrix")
    N = A.rows
    w = as_vector(w, N)
    v = as_vector(v, N)
    wv = complex(np.conj(w) @ v)
    if abs(wv - 1.0) > 1e-12:
        raise NormalizationError(f"w^H v must equal 1, got {wv}")
    if n < 1:
        raise DepthError(f"depth must be >= 1, got {n}")
    if n > N:
        raise DepthError(f"depth {n} exceeds matrix dimension {N}")

    grid = A.grid
    ident = delta_operator(grid, 0)
    wc = np.conj(w)

    v_col = [v[k] * ident for k in range(N)]
    w_row = [wc[k] * ident for k in range(N)]
    V_cols = [v_col]
    W_rows = [w_row]
    boundary: set[int] = set()

    def finish(alphas, betas, status, step=None):
        V = StarMatrix(tuple(tuple(col[k] for col in V_cols) for k in range(N)))
        W = StarMatrix(tuple(tuple(row[k].conj() for row in W_rows) for k in range(N)))
        return TridiagonalResult(
            n=len(alphas),
            alphas=tuple(alphas),
            betas=tuple(betas),
            V=V,
            W=W,
            status=status,
            breakdown_step=step,
            boundary_nodes=tuple(sorted(boundary)),
            w_in=tuple(w.tolist()),
            v_in=tuple(v.tolist()),
        )

    # First step: plain numeric contractions, then the first residual pair.
    alpha0 = None
    for k in range(N):
        for l in range(N):
            if wc[k] == 0 or v[l] == 0 or A[k, l].is_zero:
                continue
            term = A[k, l] * (wc[k] * v[l])
            alpha0 = term if alpha0 is None else alpha0 + term
    if alpha0 is None:
        alpha0 = zero_operator(grid)
    alphas = [alpha0]

    Av = apply_to_vector(A, v)
    wA = [None] * N
    for l in range(N):
        acc = None
        for k in range(N):
            if wc[k] == 0 or A[k, l].is_zero:
                continue
            term = A[k, l] * wc[k]
            acc = term if acc is None else acc + term
        wA[l] = zero_operator(grid) if acc is None else acc
    w_next = [wA[l] - wc[l] * alpha0 for l in range(N)]
    v_hat = [Av[k] - v[k] * alpha0 for k in range(N)]

    A2v = star_apply(A, Av)
    m2 = None
    for k in range(N):
        if wc[k] == 0 or A2v[k].is_zero:
            continue
        term = A2v[k] * wc[k]
        m2 = term if m2 is None else m2 + term
    if m2 is None:
        m2 = zero_operator(grid)
    beta1 = m2 - star_product(alpha0, alpha0)
    betas = [beta1]

    ref_v = max(_max_abs(Av), _max_abs(v_col))
    ref_w = max(_max_abs(wA), _max_abs(w_row))
    if _max_abs(v_hat) <= tol_lucky * ref_v or _max_abs(w_next) <= tol_lucky * ref_w:
        return finish(alphas, betas, LUCKY, 1)
    if n == 1:
        return finish(alphas, betas, COMPLETED)
    try:
        v_new, bad = star_right_divide(v_hat, beta1, tol_singular)
    except BreakdownSingularError:
        return finish(alphas, betas, SERIOUS, 1)
    boundary.update(bad)
    V_cols.append(v_new)
    W_rows.append(w_next)

    v_prev, w_prev = v_col, w_row
    v_cur, w_cur = v_new, w_next
    beta_cur = beta1

    def row_times_matrix(row):
        out = [None] * N
        for l in range(N):
            acc = None
            for m in range(N):
                if row[m].is_zero or A[m, l].is_zero:
                    continue
                term = star_product(row[m], A[m, l])
                acc = term if acc is None else acc + term
            out[l] = zero_operator(grid) if acc is None else acc
        return out

    # w_{k-1}^H * A is computed once per step and reused for alpha, the next
    # w row, and (carried over) the following step
    wA = None
    for k in range(2, n + 1):
        if wA is None:
            wA = row_times_matrix(w_cur)
        alpha = None
        for l in range(N):
            if wA[l].is_zero or v_cur[l].is_zero:
                continue
            term = star_product(wA[l], v_cur[l])
            alpha = term if alpha is None else alpha + term
        alphas.append(zero_operator(grid) if alpha is None else alpha)
        alpha = alphas[-1]

        w_next = [wA[l] - star_product(alpha, w_cur[l]) - star_product(beta_cur, w_prev[l]) for l in range(N)]
        Av_cur = star_apply(A, v_cur)
        v_hat = [Av_cur[m] - star_product(v_cur[m], alpha) - v_prev[m] for m in range(N)]

        ref_v = max(_max_abs(Av_cur), _max_abs(v_prev))
        ref_w = max(_max_abs(wA), _max_abs(w_prev))
        if _max_abs(v_hat) <= tol_lucky * ref_v or _max_abs(w_next) <= tol_lucky * ref_w:
            return finish(alphas, betas, LUCKY, k)

        # beta_k = (w_k^H * A) * v_{k-1}
        wnA = row_times_matrix(w_next)
        beta = None
        for l in range(N):
            if wnA[l].is_zero or v_cur[l].is_zero:
                continue
            term = star_product(wnA[l], v_cur[l])
            beta = term if beta is None else beta + term
        betas.append(zero_operator(grid) if beta is None else beta)
        beta = betas[-1]

        if k == n:
            return finish(alphas, betas, COMPLETED)
        try:
            v_new, bad = star_right_divide(v_hat, beta, tol_singular)
        except BreakdownSingularError:
            return finish(alphas, betas, SERIOUS, k)
        boundary.update(bad)
        V_cols.append(v_new)
        W_rows.append(w_next)
        v_prev, w_prev = v_cur, w_cur
        v_cur, w_cur = v_new, w_next
        beta_cur = beta
        wA = wnA

    return finish(alphas, betas, COMPLETED)


def tridiagonal_matrix(result: TridiagonalResult) -> StarMatrix:
    """Assemble the n x n kernel matrix: alphas on the diagonal, betas below,
    the impulse identity above, zeros elsewhere."""
    n = result.n
    grid = result.grid
    ident = delta_operator(grid, 0)
    zero = zero_operator(grid)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(result.alphas[i])
            elif i == j + 1:
                row.append(result.betas[j])
            elif j == i + 1:
                row.append(ident)
            else:
                row.append(zero)
        rows.append(tuple(row))
    return StarMatrix(tuple(rows))


def check_biorthogonality(result: TridiagonalResult) -> float:
    """Max over (i, j) of ||w_i^H * v_j - delta_ij * identity||_F / ||identity||_F."""
    grid = result.grid
    ident = delta_operator(grid, 0)
    ref = ident.frobenius()
    n = result.n
    N = result.V.rows
    worst = 0.0
    for i in range(n):
        for j in range(n):
            acc = None
            for k in range(N):
                wk = result.W[k, i].conj()
                vk = result.V[k, j]
                if wk.is_zero or vk.is_zero:
                    continue
                term = star_product(wk, vk)
                acc = term if acc is None else acc + term
            if acc is None:
                acc = zero_operator(grid)
            if i == j:
                acc = acc - ident
            worst = max(worst, acc.frobenius() / ref)
    return worst
