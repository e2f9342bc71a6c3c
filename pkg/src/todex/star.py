"""Scalar algebra of causal kernels: product, inverse, resolvent, integration.

On a fixed grid with spacing dt the product of two kernels is the ordinary
matrix product scaled by dt, the identity is Id/dt (the unit impulse), and the
inverse of a kernel is its triangular matrix inverse scaled by 1/dt^2. All
operations stay inside the lower triangular matrices, so plain forward
substitution replaces any symbolic manipulation of impulse terms.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import BreakdownSingularError, GridMismatchError, IndexRangeError
from .grid import GridOperator, delta_operator

__all__ = [
    "star_product",
    "star_inverse",
    "star_power",
    "star_resolvent",
    "integrate_from",
    "star_right_divide",
    "DEFAULT_TOL_SINGULAR",
]

DEFAULT_TOL_SINGULAR = 1e-12


def star_product(F: GridOperator, G: GridOperator) -> GridOperator:
    """Convolution product of two kernels: (F @ G) * dt."""
    if F.grid != G.grid:
        raise GridMismatchError("star_product operands live on different grids")
    return GridOperator(F.grid, (F.data @ G.data) * F.grid.dt)


def star_power(F: GridOperator, j: int) -> GridOperator:
    """j-fold product; j = 0 yields the impulse identity."""
    if j < 0:
        raise ValueError("power must be >= 0")
    if j == 0:
        return delta_operator(F.grid, 0)
    out = F
    for _ in range(j - 1):
        out = star_product(out, F)
    return out


def _diag_degeneracy(data: np.ndarray, tol: float):
    """Classify the diagonal of a triangular matrix.

    Returns (kind, detail):
      "regular"    -- every pivot clears tol * max pivot
      "zero-band"  -- diagonal uniformly negligible but a lower band is not
                      (detail = band offset of the first healthy band)
      "singular"   -- neither holds
    """
    n = data.shape[0]
    scale = float(np.max(np.abs(data)))
    if scale == 0.0:
        return "singular", None
    piv = np.abs(np.diag(data))
    pmax = float(piv.max())
    if pmax > tol * scale and not (piv <= tol * pmax).any():
        return "regular", None
    if pmax <= tol * scale:
        for b in range(1, min(4, n)):
            band = np.abs(np.diag(data, -b))
            if band.min() > tol * scale:
                return "zero-band", b
    return "singular", None


def star_inverse(F: GridOperator, tol_singular: float = DEFAULT_TOL_SINGULAR) -> GridOperator:
    """Inverse with respect to the convolution product.

    For a kernel with a numerically regular diagonal this is the exact
    triangular inverse divided by dt^2, and the product with ``F`` from either
    side reproduces the impulse identity to rounding.

    A smooth kernel that vanishes on the diagonal samples to a strictly
    singular matrix even when an inverse exists in the underlying algebra (it
    then contains impulse-derivative terms). When the whole diagonal is
    negligible but a nearby subdiagonal band is uniformly nonzero, the inverse
    is recovered from samples shifted by that band offset: the sub-block
    F[b:, :-b] is inverted and embedded in the leading principal block. The
    trailing ``b`` rows of the result are zero padding and must be treated as
    boundary rows by callers comparing against exact identities.

    Raises :class:`BreakdownSingularError` when some diagonal entry is
    negligible relative to the largest one and no shifted reading applies;
    the all-zero kernel always raises.
    """
    n = F.grid.n_nodes
    dt = F.grid.dt
    kind, band = _diag_degeneracy(F.data, tol_singular)
    if kind == "regular":
        inv = solve_triangular(F.data, np.eye(n) / dt**2, lower=True)
        return GridOperator(F.grid, inv)
    if kind == "zero-band":
        sub = F.data[band:, :-band]
        inv = solve_triangular(sub, np.eye(n - band) / dt**2, lower=True)
        out = np.zeros_like(F.data)
        out[: n - band, : n - band] = inv
        return GridOperator(F.grid, np.tril(out))
    raise BreakdownSingularError(
        "kernel is not invertible: diagonal has entries below "
        f"{tol_singular} times the dominant scale"
    )


def star_resolvent(F: GridOperator, tol_singular: float = DEFAULT_TOL_SINGULAR) -> GridOperator:
    """(identity - F)^{-1} in the algebra.

    Equals the terminating Neumann sum of the powers of F. The impulse
    identity dominates the diagonal, so for any sampled smooth kernel the
    triangular system is regular and breakdown cannot occur.
    """
    ident = delta_operator(F.grid, 0)
    return star_inverse(ident - F, tol_singular)


def integrate_from(F: GridOperator, t_col: int):
    """Running integral of column ``t_col``: node i holds sum_{k<=i} F[k, col] * dt.

    This is the requested column of the product (step kernel) * F, i.e. the
    integral of the kernel from the column's time to every later node.
    """
    n = F.grid.n_nodes
    if not -n <= t_col < n:
        raise IndexRangeError(f"column {t_col} out of range for {n} nodes")
    if t_col < 0:
        t_col += n
    return np.cumsum(F.data[:, t_col]) * F.grid.dt


def star_right_divide(
    Y: list,
    B: GridOperator,
    tol_singular: float = DEFAULT_TOL_SINGULAR,
):
    """Solve X * B = Y in the algebra for each kernel in ``Y``.

    Equivalent to multiplying by ``star_inverse(B)`` from the right but
    computed as one triangular solve per operand, which is cheaper and does
    not amplify rounding through an explicitly formed inverse.

    Pivots that are negligible against the largest pivot leave the matching
    column of X undetermined (the corner fiber of the kernel carries no
    information there). Those columns are filled by linear extrapolation along
    bands of constant t' - t from the neighbouring solved columns, and their
    indices are reported so downstream consumers can flag them as boundary
    columns. Raises :class:`BreakdownSingularError` when every pivot is
    negligible.

    Returns (list of GridOperator, tuple of repaired column indices).
    """
    grid = B.grid
    n = grid.n_nodes
    dt = grid.dt
    piv = np.abs(np.diag(B.data))
    pmax = float(piv.max())
    scale = float(np.max(np.abs(B.data)))
    if scale == 0.0 or pmax <= tol_singular * scale:
        raise BreakdownSingularError("right division by a kernel with no usable pivots")
    bad = np.flatnonzero(piv <= tol_singular * pmax)
    if bad.size == 0:
        # X = Y B^{-1} / dt: transpose once, one back substitution per operand
        xs = [
            GridOperator(grid, np.tril(solve_triangular(B.data.T, g.data.T, lower=False).T / dt))
            for g in Y
        ]
        return xs, ()
    badset = set(bad.tolist())
    out = []
    for g in Y:
        X = np.zeros_like(g.data, dtype=np.result_type(g.data, B.data))
        for j in range(n - 1, -1, -1):
            if j in badset:
                continue
            rhs = g.data[:, j] / dt - X[:, j + 1 :] @ B.data[j + 1 :, j]
            X[:, j] = rhs / B.data[j, j]
        for j in sorted(badset, reverse=True):
            for i in range(j, n):
                if i + 2 < n and j + 2 < n:
                    X[i, j] = 2.0 * X[i + 1, j + 1] - X[i + 2, j + 2]
                elif i + 1 < n and j + 1 < n:
                    X[i, j] = X[i + 1, j + 1]
        out.append(GridOperator(grid, np.tril(X)))
    return out, tuple(int(j) for j in bad)
