"""Problem descriptions: a coefficient matrix as expression text plus vectors.

A problem file is JSON with the shape

    {
      "name": "example1",
      "interval": [0.0, 1.0],
      "n_nodes": 401,
      "matrix": [["-1", "1", "1"], ["1", "0", "1"], ["1", "1", "-1"]],
      "w": [1, 0, 0],
      "v": [1, 0, 0],
      "depth": 3,
      "options": {}
    }

``matrix`` entries follow the grammar of :mod:`todex.expr`. ``n_nodes``
defaults to 401 and ``depth`` to the matrix dimension; there are no silent
defaults for the matrix or the vectors. ``w`` and ``v`` must satisfy
w^H v = 1 to 1e-12.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import expr
from .errors import DepthError, NormalizationError, ProblemFormatError
from .grid import make_grid
from .matrices import assemble

__all__ = ["ProblemSpec", "load_problem", "save_problem", "problem_from_dict"]

DEFAULT_N_NODES = 401


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    t_start: float
    t_end: float
    n_nodes: int
    matrix: tuple  # N x N tuple of expression strings
    w: tuple
    v: tuple
    depth: int
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.matrix)
        if n == 0 or any(len(row) != n for row in self.matrix):
            raise ProblemFormatError("matrix must be square and non-empty")
        if len(self.w) != n or len(self.v) != n:
            raise ProblemFormatError("w and v must match the matrix dimension")
        wv = complex(np.vdot(np.asarray(self.w, dtype=complex), np.asarray(self.v, dtype=complex)))
        if abs(wv - 1.0) > 1e-12:
            raise NormalizationError(f"w^H v must equal 1, got {wv}")
        if not 1 <= self.depth <= n:
            raise DepthError(f"depth {self.depth} outside 1..{n}")
        for row in self.matrix:
            for entry in row:
                expr.parse(entry)  # validates the syntax up front

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def with_overrides(self, n_nodes: int | None = None, depth: int | None = None) -> "ProblemSpec":
        out = self
        if n_nodes is not None:
            out = replace(out, n_nodes=int(n_nodes))
        if depth is not None:
            out = replace(out, depth=int(depth))
        return out

    def entry_callables(self):
        """Matrix of vectorized callables f(tp, t), one per entry."""
        return [[expr.to_callable(expr.parse(entry)) for entry in row] for row in self.matrix]

    def build(self, n_nodes: int | None = None):
        """Materialize (grid, kernel matrix, w, v) at the requested resolution."""
        grid = make_grid(self.t_start, self.t_end, n_nodes or self.n_nodes)
        A = assemble(grid, self.entry_callables())
        return grid, A, np.asarray(self.w), np.asarray(self.v)


def problem_from_dict(payload: dict, name: str = "") -> ProblemSpec:
    try:
        interval = payload["interval"]
        matrix = payload["matrix"]
        w = payload["w"]
        v = payload["v"]
    except (KeyError, TypeError) as exc:
        raise ProblemFormatError(f"problem file is missing required field: {exc}") from exc
    if not (isinstance(interval, (list, tuple)) and len(interval) == 2):
        raise ProblemFormatError("interval must be [t_start, t_end]")
    matrix_t = tuple(tuple(str(e) for e in row) for row in matrix)
    depth = payload.get("depth", len(matrix_t))
    return ProblemSpec(
        name=str(payload.get("name", name)),
        t_start=float(interval[0]),
        t_end=float(interval[1]),
        n_nodes=int(payload.get("n_nodes", DEFAULT_N_NODES)),
        matrix=matrix_t,
        w=tuple(float(x) for x in w),
        v=tuple(float(x) for x in v),
        depth=int(depth),
        options=dict(payload.get("options", {})),
    )


def load_problem(path) -> ProblemSpec:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(f"not valid JSON: {exc}") from exc
    return problem_from_dict(payload, name=str(path))


def save_problem(spec: ProblemSpec, path) -> None:
    payload = {
        "name": spec.name,
        "interval": [spec.t_start, spec.t_end],
        "n_nodes": spec.n_nodes,
        "matrix": [list(row) for row in spec.matrix],
        "w": list(spec.w),
        "v": list(spec.v),
        "depth": spec.depth,
        "options": spec.options,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
