"""Batch front end: read a problem file, run a computation, emit files.

Each command reads one JSON problem file, writes CSV grids and/or series plus
a ``summary.json`` under ``--out``, and echoes the summary to stdout. Reports
are deterministic: rerunning a command on the same inputs produces
byte-identical JSON. Every failure exits nonzero after printing a
machine-readable error object to stderr.

The thread count of the underlying linear algebra follows the BLAS
environment variables (for instance OMP_NUM_THREADS); no other environment
coupling exists.

If a problem with unit-vector w and v stops with a serious breakdown, the
bilinear form can still be recovered from two better-conditioned runs: with
e the all-ones vector, w^H U v = (e + w)^H U v - e^H U v, and full vectors
rarely break down. Rescale each auxiliary pair so its inner product is one,
run ``solve`` twice, and combine the two series.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from .errors import TodexError
from .lanczos import check_biorthogonality, star_lanczos, tridiagonal_matrix
from .matrices import bilinear_moment
from .oracle import example_library, rk4_series
from .pathsum import approx_series, bound_constants, error_bound
from .problems import load_problem, save_problem


def _echo_json(payload: dict) -> str:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    click.echo(text, nl=False)
    return text


def _write_summary(out_dir: Path, payload: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.json").write_text(_echo_json(payload), encoding="utf-8")


def _real_grid(op_data: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(op_data):
        if np.abs(op_data.imag).max() > 1e-9 * max(np.abs(op_data.real).max(), 1.0):
            raise TodexError("refusing to write complex grid data as CSV")
        return op_data.real
    return op_data


def _write_grid_csv(path: Path, data: np.ndarray) -> None:
    np.savetxt(path, _real_grid(data), delimiter=",", fmt="%.17g")


def _write_series_csv(path: Path, columns: dict) -> None:
    names = list(columns)
    stacked = np.column_stack([np.asarray(columns[c], dtype=float) for c in names])
    np.savetxt(path, stacked, delimiter=",", fmt="%.17g", header=",".join(names), comments="")


def _fail(exc: Exception) -> None:
    code = getattr(exc, "code", "error")
    payload = {"error": {"code": code, "message": str(exc)}}
    click.echo(json.dumps(payload, indent=2, sort_keys=True), err=True)
    sys.exit(1)


def _command_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except TodexError as exc:
            _fail(exc)
        except OSError as exc:
            _fail(exc)

    return wrapper


def _load(problem, nodes, depth):
    spec = load_problem(problem)
    return spec.with_overrides(n_nodes=nodes, depth=depth)


problem_option = click.option(
    "--problem", required=True, type=click.Path(dir_okay=False), help="Problem JSON file."
)
nodes_option = click.option("--nodes", type=int, default=None, help="Override grid size.")
depth_option = click.option("--depth", type=int, default=None, help="Override reduction depth.")
out_option = click.option(
    "--out", type=click.Path(file_okay=False), default="out", show_default=True, help="Output directory."
)


@click.group()
def main():
    """Time-ordered propagator bilinear forms via kernel tridiagonalization."""


@main.command("tridiag")
@problem_option
@nodes_option
@depth_option
@out_option
@_command_errors
def cmd_tridiag(problem, nodes, depth, out):
    """Tridiagonalize and write the coefficient kernels as CSV grids."""
    spec = _load(problem, nodes, depth)
    grid, A, w, v = spec.build()
    result = star_lanczos(A, w, v, spec.depth)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    for i, op in enumerate(result.alphas):
        name = f"alpha_{i}.csv"
        _write_grid_csv(out_dir / name, op.data)
        files[f"alpha_{i}"] = name
    for i, op in enumerate(result.betas, start=1):
        name = f"beta_{i}.csv"
        _write_grid_csv(out_dir / name, op.data)
        files[f"beta_{i}"] = name
    payload = {
        "command": "tridiag",
        "problem": spec.name,
        "n_nodes": grid.n_nodes,
        "requested_depth": spec.depth,
        "achieved_depth": result.n,
        "status": result.status,
        "breakdown_step": result.breakdown_step,
        "boundary_nodes": list(result.boundary_nodes),
        "biorthogonality_deviation": check_biorthogonality(result),
        "files": files,
    }
    _write_summary(out_dir, payload)


@main.command("solve")
@problem_option
@nodes_option
@depth_option
@out_option
@click.option("--oracle", is_flag=True, help="Also integrate the reference propagator.")
@_command_errors
def cmd_solve(problem, nodes, depth, out, oracle):
    """Approximate w^H U(t', t_start) v and write the time series."""
    spec = _load(problem, nodes, depth)
    grid, A, w, v = spec.build()
    result = star_lanczos(A, w, v, spec.depth)
    series = np.real_if_close(approx_series(result))
    columns = {"t": grid.nodes, "value": np.asarray(series, dtype=float)}
    payload = {
        "command": "solve",
        "problem": spec.name,
        "n_nodes": grid.n_nodes,
        "depth": result.n,
        "status": result.status,
        "value_at_end": float(np.real(series[-1])),
    }
    if oracle:
        fns = spec.entry_callables()
        U = rk4_series(fns, grid)
        reference = np.array(
            [np.conj(w) @ U[i] @ np.asarray(v, dtype=float) for i in range(grid.n_nodes)]
        )
        diff = np.abs(np.asarray(series) - reference)
        columns["oracle"] = reference
        columns["abs_diff"] = diff
        payload["max_abs_diff"] = float(diff.max())
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_series_csv(out_dir / "series.csv", columns)
    payload["files"] = {"series": "series.csv"}
    _write_summary(out_dir, payload)


@main.command("moments")
@problem_option
@nodes_option
@depth_option
@out_option
@click.option("--jmax", type=int, default=None, help="Largest moment order (default 2*depth - 1).")
@_command_errors
def cmd_moments(problem, nodes, depth, out, jmax):
    """Compare moments of the reduced model against the full matrix."""
    spec = _load(problem, nodes, depth)
    grid, A, w, v = spec.build()
    result = star_lanczos(A, w, v, spec.depth)
    T = tridiagonal_matrix(result)
    e1 = np.zeros(result.n)
    e1[0] = 1.0
    if jmax is None:
        jmax = 2 * result.n - 1
    table = []
    for j in range(jmax + 1):
        m_full = bilinear_moment(A, w, v, j)
        m_model = bilinear_moment(T, e1, e1, j)
        ref = m_full.frobenius()
        dev = (m_full - m_model).frobenius() / (ref if ref > 0 else 1.0)
        table.append({"j": j, "relative_deviation": dev, "guaranteed": j < 2 * result.n})
    payload = {
        "command": "moments",
        "problem": spec.name,
        "n_nodes": grid.n_nodes,
        "depth": result.n,
        "status": result.status,
        "jmax": jmax,
        "table": table,
    }
    _write_summary(Path(out), payload)


@main.command("bound")
@problem_option
@nodes_option
@out_option
@click.option("--depths", default="1,2,3", show_default=True, help="Comma-separated depths.")
@click.option("--samples", type=int, default=9, show_default=True, help="Number of t' samples.")
@_command_errors
def cmd_bound(problem, nodes, out, depths, samples):
    """Evaluate the a-priori error bound next to the measured error."""
    spec = _load(problem, nodes, None)
    grid, A, w, v = spec.build()
    fns = spec.entry_callables()
    U = rk4_series(fns, grid)
    reference = np.array([np.conj(w) @ U[i] @ np.asarray(v, dtype=float) for i in range(grid.n_nodes)])
    idx = np.unique(np.linspace(0, grid.n_nodes - 1, samples).astype(int))
    report = []
    for depth in [int(d) for d in depths.split(",") if d.strip()]:
        result = star_lanczos(A, w, v, depth)
        series = approx_series(result)
        C, D = bound_constants(A, result)
        rows = []
        for i in idx:
            tp = float(grid.nodes[i])
            rows.append(
                {
                    "t_prime": tp,
                    "bound": error_bound(A, result, tp, grid.t_start),
                    "empirical_error": float(abs(series[i] - reference[i])),
                }
            )
        report.append({"depth": result.n, "status": result.status, "C": C, "D": D, "rows": rows})
    payload = {
        "command": "bound",
        "problem": spec.name,
        "n_nodes": grid.n_nodes,
        "report": report,
    }
    _write_summary(Path(out), payload)


@main.command("conv")
@problem_option
@depth_option
@out_option
@click.option("--grids", default="101,201,401", show_default=True, help="Comma-separated node counts.")
@_command_errors
def cmd_conv(problem, depth, out, grids):
    """Grid refinement study: fit the observed order from solve errors."""
    spec = _load(problem, None, depth)
    grid_list = [int(g) for g in grids.split(",") if g.strip()]
    rows = []
    for n_nodes in grid_list:
        grid, A, w, v = spec.with_overrides(n_nodes=n_nodes).build()
        result = star_lanczos(A, w, v, spec.depth)
        series = approx_series(result)
        fns = spec.entry_callables()
        U = rk4_series(fns, grid)
        reference = np.array(
            [np.conj(w) @ U[i] @ np.asarray(v, dtype=float) for i in range(grid.n_nodes)]
        )
        rows.append(
            {
                "n_nodes": n_nodes,
                "dt": grid.dt,
                "max_abs_error": float(np.abs(np.asarray(series) - reference).max()),
            }
        )
    errors = np.array([r["max_abs_error"] for r in rows])
    dts = np.array([r["dt"] for r in rows])
    if errors.max() < 1e-10:
        order = None
        note = "errors at rounding level, order fit skipped"
    else:
        slope = np.polyfit(np.log(dts), np.log(np.maximum(errors, 1e-300)), 1)[0]
        order = float(slope)
        note = "least-squares slope of log error against log dt"
    payload = {
        "command": "conv",
        "problem": spec.name,
        "depth": spec.depth,
        "rows": rows,
        "observed_order": order,
        "note": note,
    }
    _write_summary(Path(out), payload)


@main.command("examples")
@out_option
@_command_errors
def cmd_examples(out):
    """Write the stock problem files for use with the other commands."""
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, spec in example_library().items():
        path = out_dir / f"{name}.json"
        save_problem(spec, path)
        files[name] = path.name
    _echo_json({"command": "examples", "files": files})


if __name__ == "__main__":
    main()
