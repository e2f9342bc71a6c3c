import math

import numpy as np
import pytest

from todex import (
    bilinear_moment,
    brute_moment,
    example_library,
    integrate_from,
    random_problem,
    resolvent_direct,
    rk4_propagator,
    rk4_series,
    sample_smooth,
    star_lanczos,
    star_power,
    theta_operator,
)


def example1_exact_u11(t):
    return -0.5 * math.sinh(2 * t) + 0.5 * math.cosh(2 * t) + 0.5 * math.cosh(math.sqrt(2) * t)


class TestRK4:
    def test_zero_matrix_is_identity(self):
        fns = [[lambda tp, t: 0.0 * tp for _ in range(2)] for _ in range(2)]
        U = rk4_propagator(fns, 0.0, 1.0, steps=50)
        assert np.array_equal(U, np.eye(2))

    def test_example1_entry(self, library):
        fns = library["example1"].entry_callables()
        U = rk4_propagator(fns, 0.0, 1.0, steps=10_000)
        assert abs(U[0, 0] - example1_exact_u11(1.0)) <= 1e-9

    def test_commuting_scalar(self):
        fns = [[lambda tp, t: np.cos(tp)]]
        U = rk4_propagator(fns, 0.0, 1.0, steps=10_000)
        assert abs(U[0, 0] - math.exp(math.sin(1.0))) <= 1e-9

    def test_observed_order_is_four(self, library):
        fns = library["example1"].entry_callables()
        target = example1_exact_u11(1.0)
        errors = []
        for steps in (50, 100, 200):
            U = rk4_propagator(fns, 0.0, 1.0, steps=steps)
            errors.append(abs(U[0, 0] - target))
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(np.abs(orders - 4.0) <= 0.3)

    def test_series_endpoints_match_propagator(self, library):
        spec = library["example1"]
        grid, A, w, v = spec.build(n_nodes=11)
        fns = spec.entry_callables()
        series = rk4_series(fns, grid, substeps=40)
        direct = rk4_propagator(fns, grid.t_start, grid.t_end, steps=10 * 40)
        assert np.allclose(series[-1], direct, rtol=1e-12)
        assert np.array_equal(series[0], np.eye(3))


class TestBruteMoment:
    def test_zeroth(self, library):
        grid, A, w, v = library["example1"].build(n_nodes=15)
        from todex import delta_operator

        assert np.array_equal(brute_moment(A, w, v, 0).data, delta_operator(grid, 0).data)

    def test_example1_second_moment(self, library):
        grid, A, w, v = library["example1"].build(n_nodes=201)
        m2 = brute_moment(A, w, v, 2)
        ref = sample_smooth(grid, lambda tp, t: 3.0 * (tp - t))
        assert np.max(np.abs(m2.data - ref.data)) <= 3.5 * grid.dt
        exact_discrete = star_power(theta_operator(grid), 2) * 3.0
        assert np.allclose(m2.data, exact_discrete.data, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_matches_matvec_route(self, seed):
        spec = random_problem(4, seed=seed)
        grid, A, w, v = spec.build(n_nodes=31)
        for j in range(7):
            direct = brute_moment(A, w, v, j)
            fast = bilinear_moment(A, w, v, j)
            scale = max(direct.frobenius(), 1e-300)
            assert (direct - fast).frobenius() / scale <= 1e-10

    def test_matches_matvec_route_on_library(self, library):
        for name in ("example1", "example2", "diag2"):
            grid, A, w, v = library[name].build(n_nodes=21)
            for j in range(7):
                direct = brute_moment(A, w, v, j)
                fast = bilinear_moment(A, w, v, j)
                scale = max(direct.frobenius(), 1e-300)
                assert (direct - fast).frobenius() / scale <= 1e-10


class TestResolventDirect:
    def test_scalar_case_matches_exponential(self):
        from todex import make_grid
        from todex.matrices import StarMatrix

        grid = make_grid(0, 1, 201)
        A = StarMatrix(((sample_smooth(grid, lambda tp, t: -1.0 + 0 * tp),),))
        R = resolvent_direct(A)
        series = integrate_from(R[0, 0], 0)
        assert np.max(np.abs(series - np.exp(-grid.nodes))) <= 5 * grid.dt

    def test_full_depth_reduction_reproduces_direct_route(self, library):
        grid, A, w, v = library["example1"].build(n_nodes=101)
        from todex import approx_series

        res = star_lanczos(A, w, v, 3)
        via_reduction = approx_series(res)
        R = resolvent_direct(A)
        acc = None
        wc = np.conj(np.asarray(w))
        for k in range(3):
            for l in range(3):
                if wc[k] == 0 or v[l] == 0:
                    continue
                term = R[k, l] * (wc[k] * v[l])
                acc = term if acc is None else acc + term
        direct = integrate_from(acc, 0)
        scale = max(np.max(np.abs(direct)), 1e-300)
        assert np.max(np.abs(via_reduction - direct)) / scale <= 1e-8


class TestExampleLibrary:
    def test_names(self, library):
        assert {"example1", "example2", "zero3", "const1", "cos1", "diag2", "sparse8"} <= set(library)

    def test_example1_matrix(self, library):
        assert library["example1"].matrix == (("-1", "1", "1"), ("1", "0", "1"), ("1", "1", "-1"))

    def test_example2_entries(self, library):
        m = library["example2"].matrix
        assert m[1][2] == "1 - 3*tp"
        assert m[2][2] == "2*tp + cos(tp)"
        assert m[0][0] == "cos(tp)"

    def test_diag2_breaks_luckily(self, library):
        grid, A, w, v = library["diag2"].build(n_nodes=21)
        res = star_lanczos(A, w, v, 2)
        assert res.status == "lucky-breakdown"
        assert res.breakdown_step == 1

    def test_sparse8_is_sparse_with_nonzero_corner(self, library):
        spec = library["sparse8"]
        assert spec.dim == 8
        zeros = sum(1 for row in spec.matrix for e in row if e == "0")
        assert zeros >= 20
        assert spec.matrix[0][0] != "0"

    def test_random_problem_is_reproducible(self):
        assert random_problem(4, seed=3).matrix == random_problem(4, seed=3).matrix
        assert random_problem(4, seed=3).matrix != random_problem(4, seed=4).matrix
