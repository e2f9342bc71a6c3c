"""Independent references: Runge-Kutta propagation, brute-force moments,
direct block resolvents, and a small library of stock problems.

Everything in this module deliberately avoids the tridiagonalization code
paths so that tests can cross-check the two routes against each other.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError
from .grid import GridOperator, TimeGrid, delta_operator
from .matrices import StarMatrix, as_vector, star_matmul
from .problems import ProblemSpec

__all__ = [
    "rk4_propagator",
    "rk4_series",
    "brute_moment",
    "resolvent_direct",
    "example_library",
    "random_problem",
    "DEFAULT_ORACLE_STEP_FRACTION",
]

# reference step = fraction * interval length
DEFAULT_ORACLE_STEP_FRACTION = 1e-4


def _coefficient_at(fns, tau: float, t_ref: float) -> np.ndarray:
    """Evaluate the coefficient matrix at time tau.

    Entries are functions of (t', t); the propagator treats them as functions
    of the first variable, which is the only form the solver accepts.
    """
    return np.array([[float(np.asarray(f(tau, t_ref))) for f in row] for row in fns])


def _rk4_step(fns, t_ref, t, h, U):
    k1 = _coefficient_at(fns, t, t_ref) @ U
    k2 = _coefficient_at(fns, t + h / 2, t_ref) @ (U + h / 2 * k1)
    k3 = _coefficient_at(fns, t + h / 2, t_ref) @ (U + h / 2 * k2)
    k4 = _coefficient_at(fns, t + h, t_ref) @ (U + h * k3)
    return U + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_propagator(fns, t_start: float, t_end: float, steps: int) -> np.ndarray:
    """Classic fourth-order Runge-Kutta for dU/dt = F(t) U, U(t_start) = Id."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    N = len(fns)
    U = np.eye(N)
    h = (t_end - t_start) / steps
    t = t_start
    for _ in range(steps):
        U = _rk4_step(fns, t_start, t, h, U)
        t += h
    return U


def rk4_series(fns, grid: TimeGrid, substeps: int | None = None) -> np.ndarray:
    """Propagator sampled at every grid node; shape (n_nodes, N, N).

    ``substeps`` integration steps are taken per grid interval; the default
    targets a step near DEFAULT_ORACLE_STEP_FRACTION of the interval length.
    """
    if substeps is None:
        target = DEFAULT_ORACLE_STEP_FRACTION * (grid.t_end - grid.t_start)
        substeps = max(1, int(round(grid.dt / target)))
    N = len(fns)
    U = np.eye(N)
    out = np.empty((grid.n_nodes, N, N))
    out[0] = U
    for i in range(grid.n_nodes - 1):
        h = grid.dt / substeps
        t = grid.nodes[i]
        for _ in range(substeps):
            U = _rk4_step(fns, grid.t_start, t, h, U)
            t += h
        out[i + 1] = U
    return out


def brute_moment(A: StarMatrix, w, v, j: int) -> GridOperator:
    """w^H (A^{*j}) v via explicit block matrix powers.

    Test-only reference: quadratic in the dimension and never exploits
    sparsity, unlike the matrix-vector route.
    """
    if A.rows != A.cols:
        raise DimensionMismatchError("moments need a square matrix")
    w = as_vector(w, A.rows)
    v = as_vector(v, A.cols)
    wc = np.conj(w)
    ident = delta_operator(A.grid, 0)
    if j == 0:
        return ident * (wc @ v)
    power = A
    for _ in range(j - 1):
        power = star_matmul(power, A)
    acc = None
    for k in range(A.rows):
        for l in range(A.cols):
            if wc[k] == 0 or v[l] == 0 or power[k, l].is_zero:
                continue
            term = power[k, l] * (wc[k] * v[l])
            acc = term if acc is None else acc + term
    if acc is None:
        return ident * 0.0
    return acc


def resolvent_direct(A: StarMatrix) -> StarMatrix:
    """(identity - A)^{-1} in the algebra via one dense block solve.

    The block system is ordered time-major so the kernel structure stays
    intact; a general LU factorization does the inversion. Independent of the
    scalar triangular path, and O((N * n_nodes)^3), so keep it to small
    problems.
    """
    if A.rows != A.cols:
        raise DimensionMismatchError("resolvent needs a square matrix")
    N = A.rows
    grid = A.grid
    nt = grid.n_nodes
    dt = grid.dt
    ident = delta_operator(grid, 0).data
    big = np.zeros((nt * N, nt * N), dtype=np.result_type(*(A[k, l].data for k in range(N) for l in range(N))))
    for k in range(N):
        for l in range(N):
            block = (ident if k == l else 0.0) - A[k, l].data
            big[k::N, l::N] = block
    X = np.linalg.solve(big, np.eye(nt * N) / dt**2)
    rows = []
    for k in range(N):
        row = []
        for l in range(N):
            row.append(GridOperator(grid, np.tril(X[k::N, l::N])))
        rows.append(tuple(row))
    return StarMatrix(tuple(rows))


# ---------------------------------------------------------------------------
# stock problems


def _unit_vectors(n: int):
    e1 = [0.0] * n
    e1[0] = 1.0
    return tuple(e1), tuple(e1)


def example_library() -> dict:
    """Named stock problems used across the tests and the batch tool."""
    lib = {}

    w, v = _unit_vectors(3)
    lib["example1"] = ProblemSpec(
        name="example1",
        t_start=0.0,
        t_end=1.0,
        n_nodes=401,
        matrix=(("-1", "1", "1"), ("1", "0", "1"), ("1", "1", "-1")),
        w=w,
        v=v,
        depth=3,
    )

    w, v = _unit_vectors(5)
    lib["example2"] = ProblemSpec(
        name="example2",
        t_start=0.0,
        t_end=0.5,
        n_nodes=401,
        matrix=(
            ("cos(tp)", "0", "1", "2", "1"),
            ("0", "cos(tp) - tp", "1 - 3*tp", "tp", "0"),
            ("0", "tp", "2*tp + cos(tp)", "0", "0"),
            ("0", "1", "2*tp + 1", "tp + cos(tp)", "tp"),
            ("tp", "-tp - 1", "-6*tp - 1", "1 - 2*tp", "cos(tp) - 2*tp"),
        ),
        w=w,
        v=v,
        depth=5,
    )

    w, v = _unit_vectors(3)
    lib["zero3"] = ProblemSpec(
        name="zero3",
        t_start=0.0,
        t_end=1.0,
        n_nodes=401,
        matrix=(("0", "0", "0"), ("0", "0", "0"), ("0", "0", "0")),
        w=w,
        v=v,
        depth=1,
    )

    lib["const1"] = ProblemSpec(
        name="const1",
        t_start=0.0,
        t_end=1.0,
        n_nodes=401,
        matrix=(("-1",),),
        w=(1.0,),
        v=(1.0,),
        depth=1,
    )

    lib["cos1"] = ProblemSpec(
        name="cos1",
        t_start=0.0,
        t_end=1.0,
        n_nodes=401,
        matrix=(("cos(tp)",),),
        w=(1.0,),
        v=(1.0,),
        depth=1,
    )

    w, v = _unit_vectors(2)
    lib["diag2"] = ProblemSpec(
        name="diag2",
        t_start=0.0,
        t_end=1.0,
        n_nodes=401,
        matrix=(("1", "0"), ("0", "2")),
        w=w,
        v=v,
        depth=2,
    )

    lib["sparse8"] = random_problem(8, seed=0, density=0.35)
    return lib


def _format_coeff(value: float) -> str:
    return f"{value:.17g}"


def random_problem(size: int, seed: int, density: float = 1.0, name: str = "") -> ProblemSpec:
    """Seeded random problem with entries c0 + c1 * tp, w = v = e1.

    ``density`` is the keep probability per entry; the leading entry is always
    kept nonzero so the first subdiagonal coefficient cannot vanish
    identically.
    """
    rng = np.random.default_rng(seed)
    c0 = rng.uniform(-1.0, 1.0, (size, size))
    c1 = rng.uniform(-1.0, 1.0, (size, size))
    keep = rng.random((size, size)) < density
    keep[0, 0] = True
    if abs(c0[0, 0]) < 0.1:
        c0[0, 0] = 0.5
    matrix = []
    for i in range(size):
        row = []
        for j in range(size):
            if not keep[i, j]:
                row.append("0")
            else:
                row.append(f"{_format_coeff(c0[i, j])} + {_format_coeff(c1[i, j])}*tp")
        matrix.append(tuple(row))
    w, v = _unit_vectors(size)
    return ProblemSpec(
        name=name or f"random{size}_seed{seed}",
        t_start=0.0,
        t_end=1.0,
        n_nodes=101,
        matrix=tuple(matrix),
        w=w,
        v=v,
        depth=min(3, size),
    )
