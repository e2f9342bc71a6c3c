"""Uniform time grids and their causal kernel operators.

A two-time kernel f(t', t) supported on t' >= t is represented on a uniform
grid by the lower triangular matrix F[i, j] = f(nodes[i], nodes[j]), with the
convention that the diagonal t' = t belongs to the support (a unit step kernel
has ones on its diagonal). Impulse kernels and their derivatives become
one-sided finite-difference stencils scaled by powers of 1/dt; under the
product implemented in :mod:`todex.star` these stencils act exactly like the
distributions they stand for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    EvaluationError,
    GridMismatchError,
    InvalidIntervalError,
    InvalidSizeError,
    UnsupportedOrderError,
)

__all__ = [
    "TimeGrid",
    "GridOperator",
    "make_grid",
    "theta_operator",
    "delta_operator",
    "sample_smooth",
    "zero_operator",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform discretization of a closed interval, endpoints included."""

    t_start: float
    t_end: float
    n_nodes: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise InvalidIntervalError("interval endpoints must be finite")
        if self.t_end <= self.t_start:
            raise InvalidIntervalError(
                f"t_end must exceed t_start, got [{self.t_start}, {self.t_end}]"
            )
        if self.n_nodes < 2:
            raise InvalidSizeError(f"need at least 2 nodes, got {self.n_nodes}")
        nodes = np.linspace(self.t_start, self.t_end, self.n_nodes)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / (self.n_nodes - 1)

    def __len__(self):
        return self.n_nodes


@dataclass(frozen=True, eq=False)
class GridOperator:
    """A two-time kernel sampled on a grid: lower triangular, immutable.

    The strict upper triangle is identically zero (causality). Instances
    support entrywise +, -, and multiplication by plain scalars; the algebra
    product itself lives in :mod:`todex.star`.
    """

    grid: TimeGrid
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype.kind not in "fc":
            data = data.astype(np.float64)
        data = data.copy()
        n = self.grid.n_nodes
        if data.shape != (n, n):
            raise InvalidSizeError(f"data shape {data.shape} does not match grid ({n}, {n})")
        if np.count_nonzero(np.triu(data, 1)):
            raise InvalidSizeError("strict upper triangle must be exactly zero")
        if not np.isfinite(data).all():
            raise EvaluationError("operator entries must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @cached_property
    def is_zero(self) -> bool:
        return not self.data.any()

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data)))

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.data))

    def conj(self) -> "GridOperator":
        if self.data.dtype.kind != "c":
            return self
        return GridOperator(self.grid, np.conj(self.data))

    def _check_same_grid(self, other: "GridOperator"):
        if self.grid != other.grid:
            raise GridMismatchError("operands live on different grids")

    def __add__(self, other):
        if not isinstance(other, GridOperator):
            return NotImplemented
        self._check_same_grid(other)
        return GridOperator(self.grid, self.data + other.data)

    def __sub__(self, other):
        if not isinstance(other, GridOperator):
            return NotImplemented
        self._check_same_grid(other)
        return GridOperator(self.grid, self.data - other.data)

    def __neg__(self):
        return GridOperator(self.grid, -self.data)

    def __mul__(self, scalar):
        if isinstance(scalar, GridOperator):
            return NotImplemented
        return GridOperator(self.grid, self.data * scalar)

    __rmul__ = __mul__


def make_grid(t_start: float, t_end: float, n_nodes: int) -> TimeGrid:
    """Build a uniform grid with ``n_nodes`` nodes spanning [t_start, t_end]."""
    return TimeGrid(float(t_start), float(t_end), int(n_nodes))


def zero_operator(grid: TimeGrid) -> GridOperator:
    return GridOperator(grid, np.zeros((grid.n_nodes, grid.n_nodes)))


def theta_operator(grid: TimeGrid) -> GridOperator:
    """Unit step kernel: ones on and below the diagonal.

    The diagonal carries full weight; the step is closed at t' = t.
    """
    return GridOperator(grid, np.tril(np.ones((grid.n_nodes, grid.n_nodes))))


def delta_operator(grid: TimeGrid, k: int = 0) -> GridOperator:
    """k-th derivative of the unit impulse as a finite-difference stencil.

    Entry (i, j) is (-1)^(i-j) * C(k, i-j) / dt^(k+1) for i >= j and zero
    above; k = 0 gives the identity of the algebra, Id/dt.
    """
    if k < 0:
        raise UnsupportedOrderError("impulse derivative order must be >= 0")
    if k > grid.n_nodes - 1:
        raise UnsupportedOrderError(
            f"order {k} needs at least {k + 1} nodes, grid has {grid.n_nodes}"
        )
    n = grid.n_nodes
    scale = 1.0 / grid.dt ** (k + 1)
    data = np.zeros((n, n))
    for m in range(k + 1):
        data += np.diag(np.full(n - m, (-1) ** m * math.comb(k, m) * scale), -m)
    return GridOperator(grid, data)


def sample_smooth(grid: TimeGrid, f) -> GridOperator:
    """Sample a smooth two-variable function f(t', t) below the diagonal.

    ``f`` is called with broadcastable arrays (first argument t', second t);
    scalar-only callables are evaluated pointwise as a fallback. Non-finite
    values inside the support raise :class:`EvaluationError`.
    """
    n = grid.n_nodes
    tp = grid.nodes[:, None]
    t = grid.nodes[None, :]
    with np.errstate(all="ignore"):
        try:
            values = np.asarray(f(tp, t))
            if values.shape not in ((n, n), ()):
                values = np.broadcast_to(values, (n, n))
            elif values.shape == ():
                values = np.broadcast_to(values, (n, n))
        except (TypeError, ValueError):
            values = np.array(
                [[f(grid.nodes[i], grid.nodes[j]) for j in range(n)] for i in range(n)]
            )
    if values.dtype.kind not in "fc":
        values = values.astype(np.float64)
    data = np.tril(values)
    if not np.isfinite(data).all():
        raise EvaluationError("sampled kernel is not finite on the support")
    return GridOperator(grid, data)
