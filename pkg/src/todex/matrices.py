"""Matrices of causal kernels and their block products.

A StarMatrix is a rows x cols array of GridOperators on one shared grid.
Block products use the scalar kernel product for multiplication and entrywise
sums for addition; identically-zero entries are skipped, which keeps sparse
coefficient matrices cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, GridMismatchError, InvalidSizeError
from .grid import GridOperator, TimeGrid, delta_operator, sample_smooth, zero_operator
from .star import star_product

__all__ = [
    "StarMatrix",
    "assemble",
    "star_matmul",
    "bilinear_moment",
    "identity_star_matrix",
    "as_vector",
]


@dataclass(frozen=True, eq=False)
class StarMatrix:
    """Rectangular array of kernels sharing one grid."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if not rows or not rows[0]:
            raise InvalidSizeError("StarMatrix needs at least one entry")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise InvalidSizeError("StarMatrix rows must have equal length")
        grid = rows[0][0].grid
        for r in rows:
            for op in r:
                if not isinstance(op, GridOperator):
                    raise InvalidSizeError("StarMatrix entries must be GridOperators")
                if op.grid != grid:
                    raise GridMismatchError("StarMatrix entries must share one grid")
        object.__setattr__(self, "entries", rows)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def grid(self) -> TimeGrid:
        return self.entries[0][0].grid

    def __getitem__(self, idx):
        k, l = idx
        return self.entries[k][l]


def as_vector(values, length: int | None = None) -> np.ndarray:
    """Coerce a plain numeric vector; keeps real input real."""
    v = np.asarray(values)
    if v.ndim != 1:
        raise DimensionMismatchError("expected a one-dimensional vector")
    if length is not None and v.shape[0] != length:
        raise DimensionMismatchError(f"expected length {length}, got {v.shape[0]}")
    if v.dtype.kind not in "fc":
        v = v.astype(np.float64)
    if not np.isfinite(v).all():
        raise DimensionMismatchError("vector entries must be finite")
    return v


def assemble(grid: TimeGrid, fns) -> StarMatrix:
    """Sample a rectangular array of smooth entry functions f(t', t)."""
    rows = [tuple(sample_smooth(grid, f) for f in row) for row in fns]
    if any(len(r) != len(rows[0]) for r in rows):
        raise InvalidSizeError("entry function array must be rectangular")
    return StarMatrix(tuple(rows))


def identity_star_matrix(grid: TimeGrid, n: int) -> StarMatrix:
    """n x n matrix with the impulse identity on the diagonal."""
    ident = delta_operator(grid, 0)
    zero = zero_operator(grid)
    return StarMatrix(
        tuple(tuple(ident if k == l else zero for l in range(n)) for k in range(n))
    )


def star_matmul(A: StarMatrix, B: StarMatrix) -> StarMatrix:
    """Block product: scalar multiply is the kernel product, add is entrywise."""
    if A.grid != B.grid:
        raise GridMismatchError("star_matmul operands live on different grids")
    if A.cols != B.rows:
        raise DimensionMismatchError(f"inner dimensions differ: {A.cols} vs {B.rows}")
    zero = zero_operator(A.grid)
    out = []
    for k in range(A.rows):
        row = []
        for l in range(B.cols):
            acc = None
            for m in range(A.cols):
                left = A[k, m]
                right = B[m, l]
                if left.is_zero or right.is_zero:
                    continue
                term = star_product(left, right)
                acc = term if acc is None else acc + term
            row.append(zero if acc is None else acc)
        out.append(tuple(row))
    return StarMatrix(tuple(out))


def apply_to_vector(A: StarMatrix, v: np.ndarray) -> list:
    """Numeric contraction A v: list of kernels, one per block row."""
    v = as_vector(v, A.cols)
    out = []
    for k in range(A.rows):
        acc = None
        for l in range(A.cols):
            if v[l] == 0 or A[k, l].is_zero:
                continue
            term = A[k, l] * v[l]
            acc = term if acc is None else acc + term
        out.append(zero_operator(A.grid) if acc is None else acc)
    return out


def star_apply(A: StarMatrix, x: list) -> list:
    """Block product of A with a column of kernels."""
    zero = zero_operator(A.grid)
    out = []
    for k in range(A.rows):
        acc = None
        for l in range(A.cols):
            if A[k, l].is_zero or x[l].is_zero:
                continue
            term = star_product(A[k, l], x[l])
            acc = term if acc is None else acc + term
        out.append(zero if acc is None else acc)
    return out


def bilinear_moment(A: StarMatrix, w, v, j: int) -> GridOperator:
    """Scalar kernel w^H (A^{* j}) v for time-independent vectors w and v.

    Computed with j - 1 block matrix-vector products applied to v, then one
    contraction with w; j = 0 gives (w^H v) times the impulse identity.
    """
    if A.rows != A.cols:
        raise DimensionMismatchError("moments need a square matrix")
    if j < 0:
        raise ValueError("moment order must be >= 0")
    w = as_vector(w, A.rows)
    v = as_vector(v, A.cols)
    wc = np.conj(w)
    if j == 0:
        return delta_operator(A.grid, 0) * (wc @ v)
    x = apply_to_vector(A, v)
    for _ in range(j - 1):
        x = star_apply(A, x)
    acc = None
    for k in range(A.rows):
        if wc[k] == 0 or x[k].is_zero:
            continue
        term = x[k] * wc[k]
        acc = term if acc is None else acc + term
    return zero_operator(A.grid) if acc is None else acc
